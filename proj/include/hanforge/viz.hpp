#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "hanforge/data.hpp"
#include "hanforge/encoders.hpp"

namespace hanforge::viz {

// What the heatmap shows for one article: the top-k sentences by attention
// weight, each with per-token weights.
struct HeatmapDocument {
    std::string uid;
    std::string title;
    std::size_t top_k = 5;
    double predicted_unreliable = 0.0;
    std::optional<int> label;
};

// Fill trace.sentence_texts (and v2 title tokens) from the tokenized article.
void attach_texts(encoders::AttentionTrace& trace, const data::TokenizedArticle& article,
                  const data::Vocabulary& vocab, bool title_is_sentence_zero);

// Self-contained HTML: word cells shaded by word attention (opacity
// proportional to weight, the maximum weight fully saturated), one margin bar
// per sentence shaded by sentence attention, top-k sentences in weight order,
// and the full trace embedded as machine-readable JSON.
std::string render_heatmap(const encoders::AttentionTrace& trace, const HeatmapDocument& doc);

// Versioned JSON with per-sentence token/weight arrays, sentence weights and
// article weights.
std::string trace_to_json(const encoders::AttentionTrace& trace, const std::string& uid,
                          double prediction);
encoders::AttentionTrace trace_from_json(const std::string& json_text, std::string* uid = nullptr,
                                         double* prediction = nullptr);
void export_trace(const encoders::AttentionTrace& trace, const std::string& uid, double prediction,
                  const std::string& path);

// Pull the machine-readable block back out of a rendered heatmap.
std::string extract_embedded_json(const std::string& html);

}  // namespace hanforge::viz
