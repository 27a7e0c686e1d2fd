/*
 * Copyright 2026 The celldx Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "celldx/checkpoint.h"

#include <bit>
#include <cstdint>
#include <cstring>

#include "celldx/error.h"

namespace celldx {

using nlohmann::json;

std::string EncodeDoubles(std::span<const double> values) {
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(values.size() * 16);
  for (double v : values) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    for (int byte = 0; byte < 8; ++byte) {
      const auto b = static_cast<unsigned>((bits >> (8 * byte)) & 0xffu);
      out.push_back(kHex[b >> 4]);
      out.push_back(kHex[b & 0xfu]);
    }
  }
  return out;
}

std::vector<double> DecodeDoubles(std::string_view hex) {
  if (hex.size() % 16 != 0) throw Error(ErrorCode::kParse, "hex payload length not a multiple of 16");
  auto nibble = [](char c) -> std::uint64_t {
    if (c >= '0' && c <= '9') return static_cast<std::uint64_t>(c - '0');
    if (c >= 'a' && c <= 'f') return static_cast<std::uint64_t>(c - 'a' + 10);
    if (c >= 'A' && c <= 'F') return static_cast<std::uint64_t>(c - 'A' + 10);
    throw Error(ErrorCode::kParse, "bad hex digit in parameter payload");
  };
  std::vector<double> out(hex.size() / 16);
  for (std::size_t i = 0; i < out.size(); ++i) {
    std::uint64_t bits = 0;
    for (int byte = 0; byte < 8; ++byte) {
      const std::size_t p = i * 16 + static_cast<std::size_t>(byte) * 2;
      bits |= ((nibble(hex[p]) << 4) | nibble(hex[p + 1])) << (8 * byte);
    }
    out[i] = std::bit_cast<double>(bits);
  }
  return out;
}

namespace {

template <typename Derived>
json MatrixToJson(const Eigen::DenseBase<Derived>& m) {
  // Row-major element order regardless of storage.
  std::vector<double> flat;
  flat.reserve(static_cast<std::size_t>(m.size()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) flat.push_back(m(r, c));
  }
  return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", EncodeDoubles(flat)}};
}

template <typename M>
M MatrixFromJson(const json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const auto flat = DecodeDoubles(j.at("data").get<std::string>());
  if (static_cast<Eigen::Index>(flat.size()) != rows * cols) {
    throw Error(ErrorCode::kParse, "matrix payload size mismatch");
  }
  M m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = flat[static_cast<std::size_t>(r * cols + c)];
  }
  return m;
}

std::string_view LossModeName(LossMode m) { return m == LossMode::kEnhanced ? "enhanced" : "plain"; }

std::string_view FamilyName(NoiseFamily f) {
  switch (f) {
    case NoiseFamily::kGaussian: return "gaussian";
    case NoiseFamily::kLaplace: return "laplace";
    case NoiseFamily::kLogNormal: return "lognormal";
  }
  return "?";
}

std::string_view ModeName(CategoricalMode m) {
  return m == CategoricalMode::kSwapCategory ? "swap" : "typo";
}

json NetworkToJson(const LayerStack& stack) {
  json layers = json::array();
  for (const auto& l : stack.layers()) {
    layers.push_back({{"weights", MatrixToJson(l.weights)}, {"bias", MatrixToJson(l.bias)}});
  }
  return json{{"widths", stack.widths()}, {"layers", std::move(layers)}};
}

LayerStack NetworkFromJson(const json& j) {
  LayerStack stack(j.at("widths").get<std::vector<std::size_t>>());
  const auto& layers = j.at("layers");
  if (layers.size() != stack.num_layers()) throw Error(ErrorCode::kParse, "layer count mismatch");
  for (std::size_t i = 0; i < stack.num_layers(); ++i) {
    auto& l = stack.layers()[i];
    Matrix w = MatrixFromJson<Matrix>(layers[i].at("weights"));
    RowVector b = MatrixFromJson<Matrix>(layers[i].at("bias"));
    if (w.rows() != l.weights.rows() || w.cols() != l.weights.cols() || b.size() != l.bias.size()) {
      throw Error(ErrorCode::kParse, "layer " + std::to_string(i) + " shape mismatch");
    }
    l.weights = std::move(w);
    l.bias = std::move(b);
  }
  return stack;
}

json PcaToJson(const PcaModel& p) {
  return json{{"mean", MatrixToJson(p.mean)},
              {"basis", MatrixToJson(p.basis)},
              {"eigenvalues", EncodeDoubles(p.eigenvalues)}};
}

PcaModel PcaFromJson(const json& j) {
  PcaModel p;
  p.mean = MatrixFromJson<Matrix>(j.at("mean"));
  p.basis = MatrixFromJson<Eigen::MatrixXd>(j.at("basis"));
  p.eigenvalues = DecodeDoubles(j.at("eigenvalues").get<std::string>());
  return p;
}

json MarginalsToJson(const MarginalsModel& m) {
  json attrs = json::array();
  for (std::size_t d = 0; d < m.mixtures.size(); ++d) {
    if (!m.frequencies[d].empty()) {
      attrs.push_back({{"frequencies", EncodeDoubles(m.frequencies[d])},
                       {"unseen_mass", EncodeDoubles(std::span(&m.unseen_mass[d], 1))}});
    } else {
      const auto& g = m.mixtures[d];
      attrs.push_back({{"weights", EncodeDoubles(g.weights)},
                       {"means", EncodeDoubles(g.means)},
                       {"variances", EncodeDoubles(g.variances)}});
    }
  }
  return json{{"attributes", std::move(attrs)}};
}

MarginalsModel MarginalsFromJson(const json& j) {
  MarginalsModel m;
  for (const auto& a : j.at("attributes")) {
    GaussianMixture1D g;
    std::vector<double> freq;
    double unseen = 0.0;
    if (a.contains("frequencies")) {
      freq = DecodeDoubles(a.at("frequencies").get<std::string>());
      unseen = DecodeDoubles(a.at("unseen_mass").get<std::string>()).at(0);
    } else {
      g.weights = DecodeDoubles(a.at("weights").get<std::string>());
      g.means = DecodeDoubles(a.at("means").get<std::string>());
      g.variances = DecodeDoubles(a.at("variances").get<std::string>());
    }
    m.mixtures.push_back(std::move(g));
    m.frequencies.push_back(std::move(freq));
    m.unseen_mass.push_back(unseen);
  }
  return m;
}

}  // namespace

json TrainConfigToJson(const TrainConfig& c) {
  return json{{"max_epochs", c.max_epochs}, {"batch_size", c.batch_size},
              {"base_lr", c.base_lr},       {"seed", c.seed},
              {"hidden", c.hidden}};
}

TrainConfig TrainConfigFromJson(const json& j) {
  TrainConfig c;
  c.max_epochs = j.at("max_epochs").get<std::size_t>();
  c.batch_size = j.at("batch_size").get<std::size_t>();
  c.base_lr = j.at("base_lr").get<double>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.hidden = j.at("hidden").get<std::vector<std::size_t>>();
  return c;
}

json CorruptionConfigToJson(const CorruptionConfig& c) {
  json families = json::array();
  for (auto f : c.noise_families) families.push_back(FamilyName(f));
  json modes = json::array();
  for (auto m : c.categorical_modes) modes.push_back(ModeName(m));
  return json{{"row_fraction", c.row_fraction}, {"gamma_low", c.gamma_low},
              {"gamma_high", c.gamma_high},     {"noise_families", std::move(families)},
              {"categorical_modes", std::move(modes)}, {"seed", c.seed}};
}

CorruptionConfig CorruptionConfigFromJson(const json& j) {
  CorruptionConfig c;
  c.row_fraction = j.at("row_fraction").get<double>();
  c.gamma_low = j.at("gamma_low").get<double>();
  c.gamma_high = j.at("gamma_high").get<double>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.noise_families.clear();
  for (const auto& f : j.at("noise_families")) {
    const auto s = f.get<std::string>();
    if (s == "gaussian") c.noise_families.push_back(NoiseFamily::kGaussian);
    else if (s == "laplace") c.noise_families.push_back(NoiseFamily::kLaplace);
    else if (s == "lognormal") c.noise_families.push_back(NoiseFamily::kLogNormal);
    else throw Error(ErrorCode::kParse, "unknown noise family '" + s + "'");
  }
  c.categorical_modes.clear();
  for (const auto& m : j.at("categorical_modes")) {
    const auto s = m.get<std::string>();
    if (s == "swap") c.categorical_modes.push_back(CategoricalMode::kSwapCategory);
    else if (s == "typo") c.categorical_modes.push_back(CategoricalMode::kTypoSynthesis);
    else throw Error(ErrorCode::kParse, "unknown categorical mode '" + s + "'");
  }
  return c;
}

json CheckpointToJson(const TrainedModel& model) {
  json doc;
  doc["format"] = "celldx-checkpoint";
  doc["version"] = kCheckpointVersion;
  doc["kind"] = ModelKindName(model.kind);
  doc["schema"] = SchemaToJson(model.schema);
  const auto& p = model.provenance;
  doc["provenance"] = {
      {"train_config", TrainConfigToJson(p.train)},
      {"corruption", p.corruption ? CorruptionConfigToJson(*p.corruption) : json(nullptr)},
      {"loss", LossModeName(p.loss)},
      {"epochs_run", p.epochs_run},
      {"epoch_losses", EncodeDoubles(p.epoch_losses)},
      {"regime", p.regime}};
  json params;
  if (const auto* s = std::get_if<LayerStack>(&model.parameters)) {
    params["network"] = NetworkToJson(*s);
  } else if (const auto* q = std::get_if<PcaModel>(&model.parameters)) {
    params["pca"] = PcaToJson(*q);
  } else {
    params["marginals"] = MarginalsToJson(std::get<MarginalsModel>(model.parameters));
  }
  doc["parameters"] = std::move(params);
  return doc;
}

TrainedModel CheckpointFromJson(const json& doc) {
  try {
    if (doc.at("format") != "celldx-checkpoint") throw Error(ErrorCode::kParse, "not a checkpoint");
    if (doc.at("version").get<int>() != kCheckpointVersion) {
      throw Error(ErrorCode::kParse, "unsupported checkpoint version");
    }
    TrainedModel model;
    model.kind = ParseModelKind(doc.at("kind").get<std::string>());
    model.schema = SchemaFromJson(doc.at("schema"));
    const auto& p = doc.at("provenance");
    model.provenance.train = TrainConfigFromJson(p.at("train_config"));
    if (!p.at("corruption").is_null()) {
      model.provenance.corruption = CorruptionConfigFromJson(p.at("corruption"));
    }
    model.provenance.loss = p.at("loss") == "enhanced" ? LossMode::kEnhanced : LossMode::kPlain;
    model.provenance.epochs_run = p.at("epochs_run").get<std::size_t>();
    model.provenance.epoch_losses = DecodeDoubles(p.at("epoch_losses").get<std::string>());
    model.provenance.regime = p.value("regime", "");
    const auto& params = doc.at("parameters");
    switch (model.kind) {
      case ModelKind::kDae:
      case ModelKind::kDaeEnhanced:
      case ModelKind::kAe:
        model.parameters = NetworkFromJson(params.at("network"));
        CheckArchitecture(model.network().widths(), model.schema.encoded_width());
        break;
      case ModelKind::kPca:
        model.parameters = PcaFromJson(params.at("pca"));
        break;
      case ModelKind::kMarginals:
        model.parameters = MarginalsFromJson(params.at("marginals"));
        if (model.marginals().mixtures.size() != model.schema.size()) {
          throw Error(ErrorCode::kParse, "marginals attribute count mismatch");
        }
        break;
    }
    return model;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("checkpoint: ") + e.what());
  }
}

void SaveCheckpoint(const TrainedModel& model, const std::filesystem::path& path) {
  WriteFile(path, CheckpointToJson(model).dump(1) + "\n");
}

TrainedModel LoadCheckpoint(const std::filesystem::path& path) {
  const std::string text = ReadFile(path);
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, path.string() + ": " + e.what());
  }
  return CheckpointFromJson(doc);
}

}  // namespace celldx
