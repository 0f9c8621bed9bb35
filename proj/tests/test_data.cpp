#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "hanforge/data.hpp"

using namespace hanforge;
using namespace hanforge::data;

namespace {

namespace fs = std::filesystem;

struct TempFile {
    fs::path path;
    explicit TempFile(const std::string& name, const std::string& content)
        : path(fs::temp_directory_path() / name) {
        std::ofstream out(path, std::ios::binary);
        out << content;
    }
    ~TempFile() { std::error_code ec; fs::remove(path, ec); }
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("split_sentences basic and abbreviation guard") {
    CHECK(split_sentences("A. B! C?") == std::vector<std::string>{"A.", "B!", "C?"});
    CHECK(split_sentences("").empty());
    CHECK(split_sentences("   ").empty());
    CHECK(split_sentences("Dr. Smith left. He ran.") ==
          std::vector<std::string>{"Dr. Smith left.", "He ran."});
    CHECK(split_sentences("No terminator at all") ==
          std::vector<std::string>{"No terminator at all"});
    // terminator not followed by whitespace does not split
    CHECK(split_sentences("click example.com now. Done.") ==
          std::vector<std::string>{"click example.com now.", "Done."});
    // acronym periods do not split
    CHECK(split_sentences("The U.S. economy grew. It did.") ==
          std::vector<std::string>{"The U.S. economy grew.", "It did."});
}

TEST_CASE("tokenize_words rules") {
    CHECK(tokenize_words("Breaking!") == std::vector<std::string>{"breaking", "!"});
    CHECK(tokenize_words("ISLAMIC Terrorists") == std::vector<std::string>{"islamic", "terrorists"});
    CHECK(tokenize_words("U.S.-based") == std::vector<std::string>{"u.s.", "-", "based"});
    CHECK(tokenize_words("He said: \"go\"") ==
          std::vector<std::string>{"he", "said", ":", "\"", "go", "\""});
    CHECK(tokenize_words("3.14 meters") == std::vector<std::string>{"3.14", "meters"});
    CHECK(tokenize_words("co-operate") == std::vector<std::string>{"co", "-", "operate"});
    CHECK(tokenize_words("2016 wins!!") == std::vector<std::string>{"2016", "wins", "!!"});
    CHECK(tokenize_words("").empty());
    CHECK(tokenize_words("he left.") == std::vector<std::string>{"he", "left", "."});
}

TEST_CASE("tokenization is idempotent through a space join") {
    auto rejoin = [](const std::vector<std::string>& tokens) {
        std::string s;
        for (std::size_t i = 0; i < tokens.size(); ++i) {
            if (i) s += " ";
            s += tokens[i];
        }
        return s;
    };
    RngState rng(17);
    const std::string alphabet = "abcZ .!?-'\"3x";
    for (int trial = 0; trial < 300; ++trial) {
        std::string s;
        std::size_t len = rng.next_below(30);
        for (std::size_t i = 0; i < len; ++i) s += alphabet[rng.next_below(alphabet.size())];
        auto once = tokenize_words(s);
        auto twice = tokenize_words(rejoin(once));
        CHECK(once == twice);
    }
}

TEST_CASE("load_dataset jsonl fixture round-trips byte-equal") {
    const std::string fixture =
        R"({"label":0,"normalizedText":"clean body one.","text":"body one.","title":"Title One","uid":"a-1"})"
        "\n"
        R"({"label":1,"text":"body two. second sentence!","title":"Title Two","uid":"a-2"})"
        "\n"
        R"({"label":0,"text":"body three?","title":"Title Three","uid":"a-3"})"
        "\n";
    TempFile f("hanforge_fixture.jsonl", fixture);
    auto result = load_dataset(f.path.string(), DatasetFormat::jsonl);
    REQUIRE(result.articles.size() == 3);
    CHECK(result.rejected.empty());
    CHECK(result.articles[0].uid == "a-1");
    CHECK(result.articles[0].normalized_text.value() == "clean body one.");
    CHECK(result.articles[0].body() == "clean body one.");
    CHECK(result.articles[1].body() == "body two. second sentence!");
    CHECK(result.articles[1].label == 1);

    fs::path out = fs::temp_directory_path() / "hanforge_roundtrip.jsonl";
    save_dataset_jsonl(result.articles, out.string());
    CHECK(slurp(out) == fixture);
    fs::remove(out);
}

TEST_CASE("load_dataset empty file and error contracts") {
    TempFile empty("hanforge_empty.jsonl", "");
    CHECK(load_dataset(empty.path.string(), DatasetFormat::jsonl).articles.empty());

    TempFile bad_label("hanforge_badlabel.jsonl",
                       R"({"label":2,"text":"t","title":"t","uid":"u-9"})" "\n");
    try {
        load_dataset(bad_label.path.string(), DatasetFormat::jsonl);
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("u-9") != std::string::npos);
    }

    TempFile malformed("hanforge_malformed.jsonl", "{\"uid\": \"x\"\n");
    try {
        load_dataset(malformed.path.string(), DatasetFormat::jsonl);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 1);
    }

    // records missing the title or text field are rejected with a report
    TempFile missing("hanforge_missing.jsonl",
                     R"({"label":0,"title":"only title","uid":"m-1"})" "\n"
                     R"({"label":0,"text":"ok","title":"ok","uid":"m-2"})" "\n");
    auto result = load_dataset(missing.path.string(), DatasetFormat::jsonl);
    CHECK(result.articles.size() == 1);
    REQUIRE(result.rejected.size() == 1);
    CHECK(result.rejected[0].uid == "m-1");
    CHECK(result.rejected[0].line == 1);

    TempFile dup("hanforge_dup.jsonl",
                 R"({"label":0,"text":"a","title":"a","uid":"d-1"})" "\n"
                 R"({"label":0,"text":"b","title":"b","uid":"d-1"})" "\n");
    CHECK_THROWS_AS(load_dataset(dup.path.string(), DatasetFormat::jsonl), ValidationError);
}

TEST_CASE("load_dataset csv") {
    TempFile f("hanforge_fixture.csv",
               "uid,title,text,normalizedText,label\n"
               "c-1,\"Hello, World\",\"Body one. \"\"quoted\"\"\",clean one,0\n"
               "c-2,Second,Body two,,1\n");
    auto result = load_dataset(f.path.string(), DatasetFormat::csv);
    REQUIRE(result.articles.size() == 2);
    CHECK(result.articles[0].title == "Hello, World");
    CHECK(result.articles[0].text == "Body one. \"quoted\"");
    CHECK(result.articles[0].normalized_text.value() == "clean one");
    CHECK(result.articles[1].label == 1);
    CHECK_FALSE(result.articles[1].normalized_text.has_value());

    TempFile bad("hanforge_bad.csv", "uid,title,label\nx,y,0\n");
    CHECK_THROWS_AS(load_dataset(bad.path.string(), DatasetFormat::csv), ParseError);
}

TEST_CASE("build_vocab ranking, ties, reserved ids") {
    auto art = [](const std::string& uid, const std::string& title, const std::string& text) {
        Article a;
        a.uid = uid;
        a.title = title;
        a.text = text;
        return a;
    };

    auto v = build_vocab({art("1", "", "a a b")}, 1);
    CHECK(v.size() == 3);
    CHECK(v.id_to_token[0] == std::string(kPadToken));
    CHECK(v.id_to_token[1] == std::string(kUnkToken));
    CHECK(v.id_to_token[2] == "a");
    CHECK(v.lookup("b") == kUnkId);

    // tie at equal counts: lexicographically smaller token wins
    auto tie = build_vocab({art("1", "", "y x")}, 1);
    CHECK(tie.id_to_token[2] == "x");

    // hand-counted 3-article fixture; title tokens count too
    auto corpus = std::vector<Article>{art("1", "apple pie", "apple is apple."),
                                       art("2", "banana", "banana split. banana boat."),
                                       art("3", "cherry", "apple again.")};
    auto full = build_vocab(corpus);
    // counts: apple 4, banana 3, "." 4 -> ranked ".", apple (tie 4, "." < "a"), banana...
    CHECK(full.lookup("apple") < full.lookup("banana"));
    CHECK(full.lookup("banana") < full.lookup("cherry"));

    CHECK_THROWS_AS(build_vocab({}, 10), DomainError);
}

TEST_CASE("vocab ordering is invariant to article order") {
    Article a, b;
    a.uid = "a"; a.title = "one two"; a.text = "three four. five.";
    b.uid = "b"; b.title = "five five"; b.text = "two one one.";
    auto v1 = build_vocab({a, b});
    auto v2 = build_vocab({b, a});
    CHECK(v1.id_to_token == v2.id_to_token);
}

TEST_CASE("vocab file round trip") {
    Article a;
    a.uid = "a";
    a.title = "alpha beta";
    a.text = "gamma alpha. beta alpha!";
    auto v = build_vocab({a});
    fs::path p = fs::temp_directory_path() / "hanforge_vocab.txt";
    save_vocab(v, p.string());
    auto loaded = load_vocab(p.string());
    CHECK(loaded.id_to_token == v.id_to_token);
    CHECK(vocab_fingerprint(loaded) == vocab_fingerprint(v));
    fs::remove(p);
}

TEST_CASE("load_pretrained fixture, dimension checks") {
    TempFile f("hanforge_glove.txt",
               "alpha 0.25 -1.5 3\n"
               "beta 1 2 4.75\n");
    auto emb = load_pretrained(f.path.string());
    CHECK(emb.dimension == 3);
    REQUIRE(emb.token_to_vector.count("alpha") == 1);
    CHECK(emb.token_to_vector.at("alpha")[0] == 0.25);
    CHECK(emb.token_to_vector.at("alpha")[1] == -1.5);
    CHECK(emb.token_to_vector.at("beta")[2] == 4.75);

    TempFile empty("hanforge_glove_empty.txt", "");
    CHECK_THROWS_AS(load_pretrained(empty.path.string()), ParseError);

    TempFile ragged("hanforge_glove_ragged.txt", "alpha 1 2 3\nbeta 1 2\n");
    try {
        load_pretrained(ragged.path.string());
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 2);
    }
}

TEST_CASE("build_embedding_matrix copies, draws OOV, zeros PAD") {
    Article a;
    a.uid = "a";
    a.title = "known unknown";
    a.text = "known.";
    auto vocab = build_vocab({a});

    PretrainedEmbeddings pre;
    pre.dimension = 2;
    Tensor v = Tensor::vector(2);
    v[0] = 0.5;
    v[1] = -0.5;
    pre.token_to_vector["known"] = v;

    RngState rng(3);
    auto e = build_embedding_matrix(vocab, pre, rng);
    CHECK(e.weights.rows() == vocab.size());

    std::size_t known = vocab.lookup("known");
    CHECK(e.weights.at(known, 0) == 0.5);
    CHECK(e.weights.at(known, 1) == -0.5);
    for (std::size_t c = 0; c < 2; ++c) CHECK(e.weights.at(0, c) == 0.0);  // PAD row

    std::size_t unk_word = vocab.lookup("unknown");
    for (std::size_t c = 0; c < 2; ++c) {
        CHECK(e.weights.at(unk_word, c) >= -0.05);
        CHECK(e.weights.at(unk_word, c) <= 0.05);
    }

    RngState rng2(3);
    auto e2 = build_embedding_matrix(vocab, pre, rng2);
    CHECK(e2.weights == e.weights);
}

TEST_CASE("tokenize_article structure, bounds, UNK mapping") {
    Article a;
    a.uid = "t-1";
    a.title = "alpha beta";
    a.text = "gamma delta. epsilon zeta eta!";
    auto vocab = build_vocab({a});

    encoders::HyperParams hyper;
    hyper.max_words_per_sentence = 64;
    hyper.max_sentences_per_doc = 64;
    auto tok = tokenize_article(a, vocab, hyper);
    CHECK(tok.uid == "t-1");
    CHECK(tok.title_ids.size() == 2);
    CHECK(tok.body_ids.size() == 2);
    for (auto id : tok.title_ids) CHECK(id < vocab.size());

    // exact hand lookup for a known fixture sentence
    CHECK(tok.title_ids[0] == vocab.lookup("alpha"));
    CHECK(tok.title_ids[1] == vocab.lookup("beta"));
    CHECK(tok.body_ids[0][0] == vocab.lookup("gamma"));
    CHECK(tok.body_ids[0][2] == vocab.lookup("."));

    // unknown words map to UNK against a foreign vocabulary
    Article other;
    other.uid = "t-2";
    other.title = "completely different";
    other.text = "words here.";
    auto tok2 = tokenize_article(other, vocab, hyper);
    CHECK(tok2.title_ids[0] == kUnkId);

    // normalized_text preferred over text
    Article norm = a;
    norm.normalized_text = "alpha.";
    auto tok3 = tokenize_article(norm, vocab, hyper);
    CHECK(tok3.body_ids.size() == 1);

    // title-only article is fine; fully empty article is not
    Article title_only;
    title_only.uid = "t-3";
    title_only.title = "alpha";
    auto tok4 = tokenize_article(title_only, vocab, hyper);
    CHECK(tok4.body_ids.empty());
    Article nothing;
    nothing.uid = "t-4";
    CHECK_THROWS_AS(tokenize_article(nothing, vocab, hyper), ValidationError);
}

TEST_CASE("tokenize_article enforces structural bounds on random inputs") {
    RngState rng(23);
    encoders::HyperParams hyper;
    hyper.max_words_per_sentence = 5;
    hyper.max_sentences_per_doc = 3;

    Article base;
    base.uid = "r";
    base.title = "word word word word word word word word";
    auto vocab = build_vocab({[] {
        Article a;
        a.uid = "v";
        a.title = "word";
        a.text = "word.";
        return a;
    }()});

    for (int trial = 0; trial < 50; ++trial) {
        std::string text;
        std::size_t sentences = 1 + rng.next_below(8);
        for (std::size_t s = 0; s < sentences; ++s) {
            std::size_t words = 1 + rng.next_below(12);
            for (std::size_t w = 0; w < words; ++w) text += "word ";
            text += ". ";
        }
        Article a = base;
        a.text = text;
        auto tok = tokenize_article(a, vocab, hyper);
        CHECK(tok.title_ids.size() <= hyper.max_words_per_sentence);
        CHECK(tok.body_ids.size() <= hyper.max_sentences_per_doc);
        for (const auto& sent : tok.body_ids) {
            CHECK(!sent.empty());
            CHECK(sent.size() <= hyper.max_words_per_sentence);
            for (auto id : sent) CHECK(id < vocab.size());
        }
    }
}
