#pragma once

#include <string>
#include <vector>

#include "hanforge/data.hpp"
#include "hanforge/encoders.hpp"

namespace hanforge::model_io {

// Flat binary container: 8-byte magic, little-endian u64 header length, a
// JSON header (format version, tensor names and shapes, model manifest),
// then one row-major little-endian float64 payload per named tensor, in
// header order.

inline constexpr char kMagic[8] = {'H', 'A', 'N', 'F', 'T', 'N', 'S', '1'};
inline constexpr int kFormatVersion = 1;

struct LoadedModel {
    encoders::HanModel model;
    data::Vocabulary vocab;
};

// The vocabulary travels inside the container so a checkpoint is
// self-sufficient for prediction; the manifest records variant, hyper
// parameters and the vocabulary fingerprint.
void save_model(const encoders::HanModel& model, const data::Vocabulary& vocab,
                const std::string& path);
LoadedModel load_model(const std::string& path);

// Generic named-tensor container (used for fixtures and tooling).
void save_tensors(const std::vector<std::pair<std::string, Tensor>>& tensors,
                  const std::string& path);
std::vector<std::pair<std::string, Tensor>> load_tensors(const std::string& path);

}  // namespace hanforge::model_io
