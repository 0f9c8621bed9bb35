#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "hanforge/encoders.hpp"
#include "hanforge/layers.hpp"
#include "hanforge/tensor.hpp"

namespace hanforge::data {

using hanforge::RngState;
using hanforge::Tensor;

constexpr std::size_t kPadId = 0;
constexpr std::size_t kUnkId = 1;
inline const char* kPadToken = "<pad>";
inline const char* kUnkToken = "<unk>";

// One news record: uid, title, body text, optional cleansed body, binary label
// (0 = reliable, 1 = unreliable).
struct Article {
    std::string uid;
    std::string title;
    std::string text;
    std::optional<std::string> normalized_text;
    int label = 0;

    // Cleansed body preferred when present.
    const std::string& body() const { return normalized_text ? *normalized_text : text; }
};

enum class DatasetFormat { jsonl, csv };

struct RecordIssue {
    long line = -1;
    std::string uid;
    std::string reason;
};

struct LoadResult {
    std::vector<Article> articles;
    std::vector<RecordIssue> rejected;  // records missing title or text
};

LoadResult load_dataset(const std::string& path, DatasetFormat format);
// JSONL writer matching the loader field-for-field.
void save_dataset_jsonl(const std::vector<Article>& articles, const std::string& path);
std::string article_to_json_line(const Article& a);

struct Vocabulary {
    std::unordered_map<std::string, std::size_t> token_to_id;
    std::vector<std::string> id_to_token;  // includes <pad>, <unk> at 0, 1

    std::size_t size() const { return id_to_token.size(); }
    std::size_t lookup(const std::string& token) const;
    const std::string& token(std::size_t id) const { return id_to_token.at(id); }
};

struct TokenizedArticle {
    std::string uid;
    std::vector<std::size_t> title_ids;
    std::vector<std::vector<std::size_t>> body_ids;
    int label = 0;
};

struct PretrainedEmbeddings {
    std::size_t dimension = 100;
    std::unordered_map<std::string, Tensor> token_to_vector;
};

// Rule-based sentence splitter: breaks after '.', '!' or '?' followed by
// whitespace, unless the word before a '.' is a known abbreviation. Never
// returns empty strings.
std::vector<std::string> split_sentences(const std::string& text);

// Rule-based word tokenizer. Lowercases ASCII, splits at letter/punctuation
// boundaries, emits punctuation runs as single tokens. A '.' stays inside a
// token when it sits between alphanumerics ("u.s", "3.14"), and a trailing
// '.' stays attached when the token already contains one ("u.s."), so
// acronyms survive while sentence-final periods split off.
std::vector<std::string> tokenize_words(const std::string& sentence);

// Frequency-ranked vocabulary over title + body tokens of the training split.
// Ties break lexicographically; <pad> and <unk> occupy ids 0 and 1.
Vocabulary build_vocab(const std::vector<Article>& articles, std::size_t max_size = 65510);

// One token per line, line number = id - 2.
void save_vocab(const Vocabulary& vocab, const std::string& path);
Vocabulary load_vocab(const std::string& path);

std::uint64_t vocab_fingerprint(const Vocabulary& vocab);

// GloVe-style text format: token followed by `dimension` floats per line.
PretrainedEmbeddings load_pretrained(const std::string& path);

// In-vocabulary rows copied from the pretrained table; out-of-vocabulary rows
// drawn uniform in [-0.05, 0.05]; PAD row zero.
layers::EmbeddingMatrix build_embedding_matrix(const Vocabulary& vocab,
                                               const PretrainedEmbeddings& pretrained,
                                               RngState& rng);

TokenizedArticle tokenize_article(const Article& article, const Vocabulary& vocab,
                                  const encoders::HyperParams& hyper);

std::vector<TokenizedArticle> tokenize_articles(const std::vector<Article>& articles,
                                                const Vocabulary& vocab,
                                                const encoders::HyperParams& hyper);

}  // namespace hanforge::data
