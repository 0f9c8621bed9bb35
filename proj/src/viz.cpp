#include "hanforge/viz.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

namespace hanforge::viz {

namespace {

using nlohmann::json;

std::string escape_html(const std::string& text) {
    std::string out;
    out.reserve(text.size());
    for (char c : text) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            case '\'': out += "&#39;"; break;
            default: out += c; break;
        }
    }
    return out;
}

json tensor_to_array(const hanforge::Tensor& t) {
    json arr = json::array();
    for (std::size_t i = 0; i < t.size(); ++i) arr.push_back(t[i]);
    return arr;
}

hanforge::Tensor array_to_tensor(const json& arr) {
    hanforge::Tensor t = hanforge::Tensor::vector(arr.size());
    for (std::size_t i = 0; i < arr.size(); ++i) t[i] = arr[i].get<double>();
    return t;
}

json trace_json_object(const encoders::AttentionTrace& trace, const std::string& uid,
                       double prediction) {
    json j;
    j["schema_version"] = 1;
    j["uid"] = uid;
    j["prediction"] = prediction;
    json sentences = json::array();
    for (std::size_t s = 0; s < trace.word_weights.size(); ++s) {
        json entry;
        entry["weights"] = tensor_to_array(trace.word_weights[s]);
        if (s < trace.sentence_texts.size())
            entry["tokens"] = trace.sentence_texts[s];
        else
            entry["tokens"] = json::array();
        sentences.push_back(std::move(entry));
    }
    j["sentences"] = std::move(sentences);
    j["sentence_weights"] = tensor_to_array(trace.sentence_weights);
    if (trace.has_article_weights) {
        j["article_weights"] = {{"title", trace.title_weight}, {"body", trace.body_weight}};
        j["title_tokens"] = trace.title_tokens;
        j["title_word_weights"] = tensor_to_array(trace.title_word_weights);
    }
    return j;
}

encoders::AttentionTrace trace_from_json_object(const json& j) {
    if (j.value("schema_version", -1) != 1)
        throw ParseError("unsupported trace schema_version " +
                         std::to_string(j.value("schema_version", -1)));
    encoders::AttentionTrace trace;
    for (const json& entry : j.at("sentences")) {
        trace.word_weights.push_back(array_to_tensor(entry.at("weights")));
        trace.sentence_texts.push_back(entry.at("tokens").get<std::vector<std::string>>());
    }
    trace.sentence_weights = array_to_tensor(j.at("sentence_weights"));
    if (j.contains("article_weights")) {
        trace.has_article_weights = true;
        trace.title_weight = j["article_weights"].at("title").get<double>();
        trace.body_weight = j["article_weights"].at("body").get<double>();
        if (j.contains("title_tokens"))
            trace.title_tokens = j["title_tokens"].get<std::vector<std::string>>();
        if (j.contains("title_word_weights"))
            trace.title_word_weights = array_to_tensor(j["title_word_weights"]);
    }
    return trace;
}

// Opacity scaled so the largest weight saturates fully; monotone in weight.
double cell_opacity(double weight, double max_weight) {
    if (max_weight <= 0) return 0.0;
    return weight / max_weight;
}

void render_token_row(std::ostringstream& out, const std::vector<std::string>& tokens,
                      const hanforge::Tensor& weights, double max_word_weight) {
    for (std::size_t t = 0; t < weights.size(); ++t) {
        double op = cell_opacity(weights[t], max_word_weight);
        std::string tok = t < tokens.size() ? tokens[t] : std::string("?");
        out << "<span class=\"w\" style=\"background:rgba(217,48,37," << op << ")\" title=\""
            << weights[t] << "\">" << escape_html(tok) << "</span> ";
    }
}

}  // namespace

void attach_texts(encoders::AttentionTrace& trace, const data::TokenizedArticle& article,
                  const data::Vocabulary& vocab, bool title_is_sentence_zero) {
    auto to_tokens = [&vocab](const std::vector<std::size_t>& ids) {
        std::vector<std::string> out;
        out.reserve(ids.size());
        for (std::size_t id : ids) out.push_back(vocab.token(id));
        return out;
    };
    trace.sentence_texts.clear();
    if (title_is_sentence_zero && !article.title_ids.empty())
        trace.sentence_texts.push_back(to_tokens(article.title_ids));
    for (const auto& sent : article.body_ids) trace.sentence_texts.push_back(to_tokens(sent));
    trace.sentence_texts.resize(trace.word_weights.size());
    if (trace.has_article_weights) trace.title_tokens = to_tokens(article.title_ids);
}

std::string render_heatmap(const encoders::AttentionTrace& trace, const HeatmapDocument& doc) {
    if (trace.word_weights.empty() && !trace.has_article_weights)
        throw DomainError("render_heatmap: empty trace");

    // sentences ordered by attention weight, top-k kept
    std::vector<std::size_t> order(trace.sentence_weights.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&trace](std::size_t a, std::size_t b) {
        return trace.sentence_weights[a] > trace.sentence_weights[b];
    });
    std::size_t shown = std::min<std::size_t>(doc.top_k, order.size());

    double max_word_weight = 0.0;
    for (const auto& ws : trace.word_weights)
        for (std::size_t t = 0; t < ws.size(); ++t) max_word_weight = std::max(max_word_weight, ws[t]);
    for (std::size_t t = 0; t < trace.title_word_weights.size(); ++t)
        max_word_weight = std::max(max_word_weight, trace.title_word_weights[t]);
    double max_sent_weight = 0.0;
    for (std::size_t s = 0; s < trace.sentence_weights.size(); ++s)
        max_sent_weight = std::max(max_sent_weight, trace.sentence_weights[s]);

    std::ostringstream out;
    out.precision(12);
    out << "<!DOCTYPE html>\n<html>\n<head>\n<meta charset=\"utf-8\">\n<title>attention "
        << escape_html(doc.uid) << "</title>\n<style>\n"
        << "body{font-family:Georgia,serif;max-width:72em;margin:2em auto;color:#222}\n"
        << ".sent{display:flex;margin:.4em 0;align-items:baseline}\n"
        << ".bar{width:1.2em;align-self:stretch;margin-right:.8em;border-radius:2px}\n"
        << ".w{padding:0 .15em;border-radius:3px}\n"
        << ".meta{color:#555;font-size:.9em}\n"
        << ".rank{width:2em;color:#999;font-size:.85em}\n"
        << "</style>\n</head>\n<body>\n";

    out << "<h2>" << escape_html(doc.title) << "</h2>\n";
    out << "<p class=\"meta\">uid " << escape_html(doc.uid) << " &middot; p(unreliable) "
        << doc.predicted_unreliable;
    if (doc.label) out << " &middot; label " << *doc.label;
    out << "</p>\n";

    if (trace.has_article_weights) {
        out << "<p class=\"meta\">article attention: title " << trace.title_weight << " / body "
            << trace.body_weight << "</p>\n";
        out << "<div class=\"sent\"><div class=\"bar\" style=\"background:rgba(26,115,232,"
            << trace.title_weight << ")\"></div><div class=\"rank\">T</div><div>";
        render_token_row(out, trace.title_tokens, trace.title_word_weights, max_word_weight);
        out << "</div></div>\n";
    }

    out << "<div id=\"sentences\">\n";
    for (std::size_t k = 0; k < shown; ++k) {
        std::size_t s = order[k];
        double bar = max_sent_weight > 0 ? trace.sentence_weights[s] / max_sent_weight : 0.0;
        out << "<div class=\"sent\"><div class=\"bar\" style=\"background:rgba(26,115,232," << bar
            << ")\" title=\"" << trace.sentence_weights[s] << "\"></div><div class=\"rank\">"
            << (k + 1) << "</div><div>";
        const auto& tokens =
            s < trace.sentence_texts.size() ? trace.sentence_texts[s] : std::vector<std::string>{};
        render_token_row(out, tokens, trace.word_weights[s], max_word_weight);
        out << "</div></div>\n";
    }
    out << "</div>\n";

    json payload = trace_json_object(trace, doc.uid, doc.predicted_unreliable);
    out << "<script type=\"application/json\" id=\"attention-data\">\n"
        << payload.dump() << "\n</script>\n";
    out << "</body>\n</html>\n";
    return out.str();
}

std::string trace_to_json(const encoders::AttentionTrace& trace, const std::string& uid,
                          double prediction) {
    return trace_json_object(trace, uid, prediction).dump(2);
}

encoders::AttentionTrace trace_from_json(const std::string& json_text, std::string* uid,
                                         double* prediction) {
    json j = json::parse(json_text, nullptr, false);
    if (j.is_discarded()) throw ParseError("malformed trace JSON");
    if (uid) *uid = j.value("uid", "");
    if (prediction) *prediction = j.value("prediction", 0.0);
    return trace_from_json_object(j);
}

void export_trace(const encoders::AttentionTrace& trace, const std::string& uid, double prediction,
                  const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write trace file '" + path + "'");
    out << trace_to_json(trace, uid, prediction) << "\n";
    if (!out) throw IoError("short write to trace file '" + path + "'");
}

std::string extract_embedded_json(const std::string& html) {
    const std::string open = "<script type=\"application/json\" id=\"attention-data\">";
    const std::string close = "</script>";
    std::size_t a = html.find(open);
    if (a == std::string::npos) throw ParseError("heatmap has no embedded attention data");
    a += open.size();
    std::size_t b = html.find(close, a);
    if (b == std::string::npos) throw ParseError("heatmap attention data block is unterminated");
    return html.substr(a, b - a);
}

}  // namespace hanforge::viz
