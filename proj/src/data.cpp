#include "hanforge/data.hpp"

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace hanforge::data {

namespace {

using nlohmann::json;

bool is_word_char(unsigned char c) {
    return std::isalnum(c) != 0 || c >= 0x80;  // non-ASCII bytes count as word characters
}

bool is_space(unsigned char c) {
    return std::isspace(c) != 0;
}

char lower(unsigned char c) {
    return static_cast<char>(std::tolower(c));
}

// Words before a '.' that usually mark an abbreviation, not a sentence end.
const std::set<std::string>& abbreviations() {
    static const std::set<std::string> abbr = {
        "mr", "mrs", "ms", "dr", "prof", "sr", "jr", "st", "rev", "gen", "rep", "sen",
        "gov", "lt", "col", "sgt", "capt", "cmdr", "adm", "maj", "vs", "etc", "inc",
        "ltd", "co", "corp", "dept", "univ", "assn", "bros", "fig", "no", "vol", "jan",
        "feb", "mar", "apr", "jun", "jul", "aug", "sep", "sept", "oct", "nov", "dec",
        "approx", "est", "min", "max", "misc", "al"};
    return abbr;
}

// The word immediately preceding position `i` (exclusive), lowercased, with
// any internal periods kept ("e.g" stays "e.g").
std::string word_before(const std::string& text, std::size_t i) {
    std::size_t end = i;
    std::size_t start = end;
    while (start > 0) {
        unsigned char c = text[start - 1];
        if (is_word_char(c) || c == '.') {
            --start;
        } else {
            break;
        }
    }
    std::string w;
    for (std::size_t k = start; k < end; ++k) w.push_back(lower(text[k]));
    return w;
}

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && is_space(s[a])) ++a;
    while (b > a && is_space(s[b - 1])) --b;
    return s.substr(a, b - a);
}

struct ParsedRecord {
    Article article;
    bool has_title = false;
    bool has_text = false;
};

ParsedRecord record_from_json(const json& j, long line) {
    ParsedRecord rec;
    Article& a = rec.article;
    if (!j.is_object()) throw ParseError("record is not a JSON object", line);
    if (j.contains("uid")) {
        if (j["uid"].is_string())
            a.uid = j["uid"].get<std::string>();
        else
            a.uid = j["uid"].dump();
    }
    if (j.contains("title") && j["title"].is_string()) {
        a.title = j["title"].get<std::string>();
        rec.has_title = true;
    }
    if (j.contains("text") && j["text"].is_string()) {
        a.text = j["text"].get<std::string>();
        rec.has_text = true;
    }
    if (j.contains("normalizedText") && j["normalizedText"].is_string())
        a.normalized_text = j["normalizedText"].get<std::string>();

    if (!j.contains("label")) throw ValidationError("record '" + a.uid + "' has no label");
    const json& lbl = j["label"];
    if (lbl.is_number_integer() && (lbl.get<int>() == 0 || lbl.get<int>() == 1)) {
        a.label = lbl.get<int>();
    } else if (lbl.is_string() && (lbl.get<std::string>() == "0" || lbl.get<std::string>() == "1")) {
        a.label = lbl.get<std::string>() == "1" ? 1 : 0;
    } else {
        throw ValidationError("record '" + a.uid + "' has unknown label value " + lbl.dump() +
                              ", expected 0 or 1");
    }
    return rec;
}

// RFC 4180-style CSV reader; handles quoted fields with doubled quotes and
// embedded newlines.
std::vector<std::vector<std::string>> parse_csv(std::istream& in) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    bool in_quotes = false;
    bool field_started = false;
    int c;
    auto end_field = [&]() {
        row.push_back(field);
        field.clear();
        field_started = false;
    };
    auto end_row = [&]() {
        end_field();
        rows.push_back(row);
        row.clear();
    };
    while ((c = in.get()) != EOF) {
        char ch = static_cast<char>(c);
        if (in_quotes) {
            if (ch == '"') {
                if (in.peek() == '"') {
                    field.push_back('"');
                    in.get();
                } else {
                    in_quotes = false;
                }
            } else {
                field.push_back(ch);
            }
            continue;
        }
        switch (ch) {
            case '"':
                in_quotes = true;
                field_started = true;
                break;
            case ',':
                end_field();
                break;
            case '\r':
                break;
            case '\n':
                end_row();
                break;
            default:
                field.push_back(ch);
                field_started = true;
                break;
        }
    }
    if (field_started || !field.empty() || !row.empty()) end_row();
    return rows;
}

std::uint64_t fnv1a(const std::string& s, std::uint64_t h) {
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace

std::size_t Vocabulary::lookup(const std::string& token) const {
    auto it = token_to_id.find(token);
    return it == token_to_id.end() ? kUnkId : it->second;
}

LoadResult load_dataset(const std::string& path, DatasetFormat format) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open dataset file '" + path + "'");
    LoadResult result;
    std::set<std::string> seen_uids;

    auto admit = [&result, &seen_uids](Article a, bool has_title, bool has_text, long line) {
        if (a.uid.empty()) {
            result.rejected.push_back({line, "", "missing uid"});
            return;
        }
        if (!has_title || !has_text) {
            result.rejected.push_back(
                {line, a.uid, !has_title ? "missing title field" : "missing text field"});
            return;
        }
        if (!seen_uids.insert(a.uid).second)
            throw ValidationError("duplicate uid '" + a.uid + "' in dataset");
        result.articles.push_back(std::move(a));
    };

    if (format == DatasetFormat::jsonl) {
        std::string line;
        long line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            std::string t = trim(line);
            if (t.empty()) continue;
            json j = json::parse(t, nullptr, false);
            if (j.is_discarded()) throw ParseError("malformed JSON record", line_no);
            ParsedRecord rec = record_from_json(j, line_no);
            admit(std::move(rec.article), rec.has_title, rec.has_text, line_no);
        }
    } else {
        auto rows = parse_csv(in);
        if (rows.empty()) return result;
        const auto& header = rows[0];
        std::map<std::string, std::size_t> col;
        for (std::size_t i = 0; i < header.size(); ++i) col[header[i]] = i;
        for (const char* required : {"uid", "title", "text", "label"})
            if (!col.count(required))
                throw ParseError(std::string("CSV header missing column '") + required + "'", 1);
        for (std::size_t r = 1; r < rows.size(); ++r) {
            const auto& cells = rows[r];
            long line_no = static_cast<long>(r + 1);
            if (cells.size() < header.size())
                throw ParseError("CSV record has " + std::to_string(cells.size()) +
                                     " fields, header has " + std::to_string(header.size()),
                                 line_no);
            Article a;
            a.uid = cells[col["uid"]];
            a.title = cells[col["title"]];
            a.text = cells[col["text"]];
            if (col.count("normalizedText") && !cells[col["normalizedText"]].empty())
                a.normalized_text = cells[col["normalizedText"]];
            const std::string& lbl = cells[col["label"]];
            if (lbl == "0" || lbl == "1") {
                a.label = lbl == "1" ? 1 : 0;
            } else {
                throw ValidationError("record '" + a.uid + "' has unknown label value '" + lbl +
                                      "', expected 0 or 1");
            }
            admit(std::move(a), true, true, line_no);
        }
    }
    return result;
}

std::string article_to_json_line(const Article& a) {
    json j;
    j["uid"] = a.uid;
    j["title"] = a.title;
    j["text"] = a.text;
    if (a.normalized_text) j["normalizedText"] = *a.normalized_text;
    j["label"] = a.label;
    return j.dump();
}

void save_dataset_jsonl(const std::vector<Article>& articles, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write dataset file '" + path + "'");
    for (const Article& a : articles) out << article_to_json_line(a) << "\n";
}

std::vector<std::string> split_sentences(const std::string& text) {
    std::vector<std::string> sentences;
    std::string current;
    for (std::size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        current.push_back(c);
        if (c != '.' && c != '!' && c != '?') continue;
        bool at_boundary = i + 1 < text.size() && is_space(static_cast<unsigned char>(text[i + 1]));
        if (!at_boundary) continue;
        if (c == '.') {
            std::string w = word_before(text, i);
            // strip internal periods so "e.g" and "e.g." both guard
            std::string bare;
            for (char ch : w)
                if (ch != '.') bare.push_back(ch);
            if (abbreviations().count(bare) || abbreviations().count(w)) continue;
            // "U.S." style acronyms: single letters separated by periods
            if (w.find('.') != std::string::npos && !w.empty()) continue;
        }
        std::string s = trim(current);
        if (!s.empty()) sentences.push_back(std::move(s));
        current.clear();
    }
    std::string tail = trim(current);
    if (!tail.empty()) sentences.push_back(std::move(tail));
    return sentences;
}

std::vector<std::string> tokenize_words(const std::string& sentence) {
    std::vector<std::string> tokens;
    std::string word;   // current word token
    std::string punct;  // current punctuation run
    auto flush_word = [&]() {
        if (!word.empty()) {
            tokens.push_back(word);
            word.clear();
        }
    };
    auto flush_punct = [&]() {
        if (!punct.empty()) {
            tokens.push_back(punct);
            punct.clear();
        }
    };
    for (std::size_t i = 0; i < sentence.size(); ++i) {
        unsigned char c = sentence[i];
        if (is_space(c)) {
            flush_word();
            flush_punct();
            continue;
        }
        if (is_word_char(c)) {
            flush_punct();
            word.push_back(c < 0x80 ? lower(c) : static_cast<char>(c));
            continue;
        }
        if (c == '.' && !word.empty()) {
            bool next_is_word = i + 1 < sentence.size() &&
                                is_word_char(static_cast<unsigned char>(sentence[i + 1]));
            bool has_period = word.find('.') != std::string::npos;
            if (next_is_word || has_period) {  // "u.s", "3.14", trailing dot of "u.s."
                word.push_back('.');
                continue;
            }
        }
        flush_word();
        punct.push_back(static_cast<char>(c));
    }
    flush_word();
    flush_punct();
    return tokens;
}

Vocabulary build_vocab(const std::vector<Article>& articles, std::size_t max_size) {
    if (articles.empty()) throw DomainError("build_vocab: empty corpus");
    std::map<std::string, std::size_t> counts;
    auto count_text = [&counts](const std::string& text) {
        for (const std::string& sent : split_sentences(text))
            for (const std::string& tok : tokenize_words(sent)) ++counts[tok];
    };
    for (const Article& a : articles) {
        for (const std::string& tok : tokenize_words(a.title)) ++counts[tok];
        count_text(a.body());
    }
    // rank by frequency, ties lexicographically ascending
    std::vector<std::pair<std::size_t, std::string>> ranked;
    ranked.reserve(counts.size());
    for (auto& [tok, n] : counts) ranked.emplace_back(n, tok);
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    if (ranked.size() > max_size) ranked.resize(max_size);

    Vocabulary v;
    v.id_to_token = {kPadToken, kUnkToken};
    for (auto& [n, tok] : ranked) v.id_to_token.push_back(tok);
    for (std::size_t i = 0; i < v.id_to_token.size(); ++i) v.token_to_id[v.id_to_token[i]] = i;
    return v;
}

void save_vocab(const Vocabulary& vocab, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write vocabulary file '" + path + "'");
    for (std::size_t i = 2; i < vocab.id_to_token.size(); ++i) out << vocab.id_to_token[i] << "\n";
}

Vocabulary load_vocab(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open vocabulary file '" + path + "'");
    Vocabulary v;
    v.id_to_token = {kPadToken, kUnkToken};
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty()) v.id_to_token.push_back(line);
    }
    for (std::size_t i = 0; i < v.id_to_token.size(); ++i) v.token_to_id[v.id_to_token[i]] = i;
    return v;
}

std::uint64_t vocab_fingerprint(const Vocabulary& vocab) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const std::string& tok : vocab.id_to_token) {
        h = fnv1a(tok, h);
        h = fnv1a("\n", h);
    }
    return h;
}

PretrainedEmbeddings load_pretrained(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open embeddings file '" + path + "'");
    PretrainedEmbeddings emb;
    emb.dimension = 0;
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        std::istringstream ls(line);
        std::string token;
        ls >> token;
        std::vector<double> values;
        double x;
        while (ls >> x) values.push_back(x);
        if (!ls.eof())
            throw ParseError("non-numeric value in embedding row for '" + token + "'", line_no);
        if (values.empty()) throw ParseError("embedding row for '" + token + "' has no values", line_no);
        if (emb.dimension == 0) emb.dimension = values.size();
        if (values.size() != emb.dimension)
            throw ParseError("embedding row for '" + token + "' has " +
                                 std::to_string(values.size()) + " values, expected " +
                                 std::to_string(emb.dimension),
                             line_no);
        Tensor v = Tensor::vector(values.size());
        for (std::size_t i = 0; i < values.size(); ++i) v[i] = values[i];
        emb.token_to_vector[token] = std::move(v);
    }
    if (emb.dimension == 0)
        throw ParseError("embeddings file '" + path + "' is empty; cannot infer dimension");
    return emb;
}

layers::EmbeddingMatrix build_embedding_matrix(const Vocabulary& vocab,
                                               const PretrainedEmbeddings& pretrained,
                                               RngState& rng) {
    layers::EmbeddingMatrix e;
    std::size_t d = pretrained.dimension;
    e.weights = Tensor::matrix(vocab.size(), d);
    for (std::size_t id = 1; id < vocab.size(); ++id) {  // PAD row stays zero
        auto it = pretrained.token_to_vector.find(vocab.id_to_token[id]);
        if (it != pretrained.token_to_vector.end()) {
            for (std::size_t c = 0; c < d; ++c) e.weights.at(id, c) = it->second[c];
        } else {
            for (std::size_t c = 0; c < d; ++c) e.weights.at(id, c) = rng.next_uniform(-0.05, 0.05);
        }
    }
    return e;
}

TokenizedArticle tokenize_article(const Article& article, const Vocabulary& vocab,
                                  const encoders::HyperParams& hyper) {
    TokenizedArticle t;
    t.uid = article.uid;
    t.label = article.label;

    auto to_ids = [&vocab, &hyper](const std::vector<std::string>& tokens) {
        std::vector<std::size_t> ids;
        std::size_t n = std::min(tokens.size(), hyper.max_words_per_sentence);
        ids.reserve(n);
        for (std::size_t i = 0; i < n; ++i) ids.push_back(vocab.lookup(tokens[i]));
        return ids;
    };

    t.title_ids = to_ids(tokenize_words(article.title));
    for (const std::string& sent : split_sentences(article.body())) {
        if (t.body_ids.size() >= hyper.max_sentences_per_doc) break;
        auto ids = to_ids(tokenize_words(sent));
        if (!ids.empty()) t.body_ids.push_back(std::move(ids));
    }
    if (t.title_ids.empty() && t.body_ids.empty())
        throw ValidationError("article '" + article.uid + "' has empty title and empty body");
    return t;
}

std::vector<TokenizedArticle> tokenize_articles(const std::vector<Article>& articles,
                                                const Vocabulary& vocab,
                                                const encoders::HyperParams& hyper) {
    std::vector<TokenizedArticle> out;
    out.reserve(articles.size());
    for (const Article& a : articles) out.push_back(tokenize_article(a, vocab, hyper));
    return out;
}

}  // namespace hanforge::data
