#include "hanforge/model_io.hpp"

#include <cstring>
#include <fstream>

#include <json.hpp>

namespace hanforge::model_io {

namespace {

using nlohmann::json;

void write_u64_le(std::ostream& out, std::uint64_t v) {
    unsigned char buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
    out.write(reinterpret_cast<const char*>(buf), 8);
}

std::uint64_t read_u64_le(std::istream& in) {
    unsigned char buf[8];
    in.read(reinterpret_cast<char*>(buf), 8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
    return v;
}

void write_doubles_le(std::ostream& out, const double* data, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        std::uint64_t bits;
        std::memcpy(&bits, &data[i], 8);
        write_u64_le(out, bits);
    }
}

void read_doubles_le(std::istream& in, double* data, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        std::uint64_t bits = read_u64_le(in);
        std::memcpy(&data[i], &bits, 8);
    }
}

json shape_json(const Tensor& t) {
    json s = json::array();
    for (std::size_t dim : t.shape()) s.push_back(dim);
    return s;
}

Tensor tensor_for_shape(const json& shape) {
    if (shape.size() == 1) return Tensor::vector(shape[0].get<std::size_t>());
    if (shape.size() == 2)
        return Tensor::matrix(shape[0].get<std::size_t>(), shape[1].get<std::size_t>());
    throw ParseError("unsupported tensor rank " + std::to_string(shape.size()) + " in container");
}

void write_container(const std::string& path, json header,
                     const std::vector<std::pair<std::string, const Tensor*>>& tensors) {
    json tlist = json::array();
    for (const auto& [name, t] : tensors) tlist.push_back({{"name", name}, {"shape", shape_json(*t)}});
    header["tensors"] = tlist;
    header["format_version"] = kFormatVersion;
    std::string hdr = header.dump();

    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write model file '" + path + "'");
    out.write(kMagic, 8);
    write_u64_le(out, hdr.size());
    out.write(hdr.data(), static_cast<std::streamsize>(hdr.size()));
    for (const auto& [name, t] : tensors) write_doubles_le(out, t->data(), t->size());
    if (!out) throw IoError("short write to model file '" + path + "'");
}

struct Container {
    json header;
    std::vector<std::pair<std::string, Tensor>> tensors;
};

Container read_container(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open model file '" + path + "'");
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, kMagic, 8) != 0)
        throw ParseError("'" + path + "' is not a model container (bad magic)");
    std::uint64_t hdr_len = read_u64_le(in);
    std::string hdr(hdr_len, '\0');
    in.read(hdr.data(), static_cast<std::streamsize>(hdr_len));
    if (!in) throw ParseError("truncated container header in '" + path + "'");
    Container c;
    c.header = json::parse(hdr, nullptr, false);
    if (c.header.is_discarded()) throw ParseError("malformed container header in '" + path + "'");
    if (c.header.value("format_version", -1) != kFormatVersion)
        throw ParseError("unsupported container format_version in '" + path + "'");
    for (const json& entry : c.header.at("tensors")) {
        Tensor t = tensor_for_shape(entry.at("shape"));
        read_doubles_le(in, t.data(), t.size());
        if (!in) throw ParseError("truncated tensor payload '" +
                                  entry.at("name").get<std::string>() + "' in '" + path + "'");
        c.tensors.emplace_back(entry.at("name").get<std::string>(), std::move(t));
    }
    return c;
}

}  // namespace

void save_model(const encoders::HanModel& model, const data::Vocabulary& vocab,
                const std::string& path) {
    json manifest;
    manifest["variant"] = encoders::variant_name(model.variant);
    manifest["hyper"] = {{"max_words_per_sentence", model.hyper.max_words_per_sentence},
                         {"max_sentences_per_doc", model.hyper.max_sentences_per_doc},
                         {"embedding_dim", model.hyper.embedding_dim},
                         {"hidden_size", model.hyper.hidden_size},
                         {"dropout_rate", model.hyper.dropout_rate}};
    manifest["separate_article_grus"] = model.separate_article_grus;
    manifest["joint_article_sequence"] = model.joint_article_sequence;
    manifest["embedding_trainable"] = model.embedding.trainable;
    manifest["vocab_fingerprint"] = data::vocab_fingerprint(vocab);
    manifest["vocabulary"] = vocab.id_to_token;

    json header;
    header["kind"] = "han_model";
    header["manifest"] = manifest;

    std::vector<std::pair<std::string, const Tensor*>> tensors;
    for (const auto& ref : encoders::parameter_refs(model)) tensors.emplace_back(ref.name, ref.tensor);
    write_container(path, std::move(header), tensors);
}

LoadedModel load_model(const std::string& path) {
    Container c = read_container(path);
    if (c.header.value("kind", "") != "han_model")
        throw ParseError("'" + path + "' does not contain a model (kind=" +
                         c.header.value("kind", "?") + ")");
    const json& manifest = c.header.at("manifest");

    LoadedModel out;
    encoders::HyperParams hyper;
    const json& h = manifest.at("hyper");
    hyper.max_words_per_sentence = h.at("max_words_per_sentence").get<std::size_t>();
    hyper.max_sentences_per_doc = h.at("max_sentences_per_doc").get<std::size_t>();
    hyper.embedding_dim = h.at("embedding_dim").get<std::size_t>();
    hyper.hidden_size = h.at("hidden_size").get<std::size_t>();
    hyper.dropout_rate = h.at("dropout_rate").get<double>();

    out.vocab.id_to_token = manifest.at("vocabulary").get<std::vector<std::string>>();
    for (std::size_t i = 0; i < out.vocab.id_to_token.size(); ++i)
        out.vocab.token_to_id[out.vocab.id_to_token[i]] = i;
    std::uint64_t fp = manifest.at("vocab_fingerprint").get<std::uint64_t>();
    if (fp != data::vocab_fingerprint(out.vocab))
        throw ParseError("vocabulary fingerprint mismatch in '" + path + "'");

    RngState rng(0);  // structural init only; every tensor is overwritten below
    out.model = encoders::init_model(
        encoders::variant_from_name(manifest.at("variant").get<std::string>()), hyper,
        out.vocab.size(), rng, manifest.value("separate_article_grus", false),
        manifest.value("joint_article_sequence", false));
    out.model.embedding.trainable = manifest.value("embedding_trainable", true);

    auto refs = encoders::parameter_refs(out.model);
    if (refs.size() != c.tensors.size())
        throw ParseError("container '" + path + "' holds " + std::to_string(c.tensors.size()) +
                         " tensors, model expects " + std::to_string(refs.size()));
    for (std::size_t i = 0; i < refs.size(); ++i) {
        auto& [name, t] = c.tensors[i];
        if (name != refs[i].name)
            throw ParseError("tensor order mismatch in '" + path + "': expected '" + refs[i].name +
                             "', found '" + name + "'");
        if (!t.same_shape(*refs[i].tensor))
            throw ParseError("tensor '" + name + "' in '" + path + "' has shape " + t.shape_str() +
                             ", model expects " + refs[i].tensor->shape_str());
        *refs[i].tensor = std::move(t);
    }
    return out;
}

void save_tensors(const std::vector<std::pair<std::string, Tensor>>& tensors,
                  const std::string& path) {
    json header;
    header["kind"] = "tensors";
    std::vector<std::pair<std::string, const Tensor*>> refs;
    for (const auto& [name, t] : tensors) refs.emplace_back(name, &t);
    write_container(path, std::move(header), refs);
}

std::vector<std::pair<std::string, Tensor>> load_tensors(const std::string& path) {
    return read_container(path).tensors;
}

}  // namespace hanforge::model_io
