// Copyright (c) 2026 The mgfusion Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mgfusion/envelope.hpp"
#include "mgfusion/error.hpp"
#include "mgfusion/keywords.hpp"
#include "mgfusion/numeric.hpp"

namespace mgf {

inline constexpr std::size_t kEncoderLayers = 3;
inline constexpr std::string_view kWeightMagic = "MGFW";

struct EncoderDims {
  std::size_t vocab = 0;         // embedding rows, indexed by token id
  std::size_t embed = 0;         // e
  std::size_t repr = 0;          // r: width of every recurrent layer and of the query
  std::size_t language_hidden = 0;
  std::size_t acoustic_hidden = 0;

  friend bool operator==(const EncoderDims&, const EncoderDims&) = default;
};

/// One recurrent layer. Gate blocks are stacked in the order
/// input, forget, candidate, output; each block has `repr` rows.
struct RecurrentLayer {
  std::size_t input = 0;
  Vec w_input;      // 4r x input
  Vec w_recurrent;  // 4r x r
  Vec bias;         // 4r
};

/// Parameters of the keyword encoder, the fake-keyword representation and the
/// query projection. Concatenation order for the projection input is
/// [language hidden ; acoustic hidden].
struct EncoderWeights {
  EncoderDims dims;
  Vec embedding;  // vocab x embed
  std::array<RecurrentLayer, kEncoderLayers> layers;
  Vec fake_repr;  // r
  Vec proj_w;     // r x (d_l + d_a)
  Vec proj_b;     // r
  std::string provenance;

  std::size_t query_input() const noexcept { return dims.language_hidden + dims.acoustic_hidden; }

  static EncoderWeights zeros(EncoderDims d) {
    if (d.vocab < 1 || d.embed < 1 || d.repr < 1 || d.language_hidden < 1 || d.acoustic_hidden < 1)
      fail(Errc::BadDims, "encoder dims must all be positive");
    EncoderWeights w;
    w.dims = d;
    w.embedding.assign(d.vocab * d.embed, 0.0);
    for (std::size_t l = 0; l < kEncoderLayers; ++l) {
      auto& layer = w.layers[l];
      layer.input = l == 0 ? d.embed : d.repr;
      layer.w_input.assign(4 * d.repr * layer.input, 0.0);
      layer.w_recurrent.assign(4 * d.repr * d.repr, 0.0);
      layer.bias.assign(4 * d.repr, 0.0);
    }
    w.fake_repr.assign(d.repr, 0.0);
    w.proj_w.assign(d.repr * w.query_input(), 0.0);
    w.proj_b.assign(d.repr, 0.0);
    w.provenance = "zeros";
    return w;
  }

  /// Every parameter drawn uniformly from [-0.1, 0.1] in file order.
  static EncoderWeights random_uniform(EncoderDims d, std::uint64_t seed) {
    EncoderWeights w = zeros(d);
    std::mt19937_64 rng(seed);
    w.for_each_array([&rng](Vec& a) {
      for (double& v : a) v = -0.1 + 0.2 * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
    });
    w.provenance = "uniform[-0.1,0.1] seed=" + std::to_string(seed);
    return w;
  }

  /// Visits parameter arrays in the weight-file order.
  template <typename F>
  void for_each_array(F&& f) {
    f(embedding);
    for (auto& layer : layers) {
      f(layer.w_input);
      f(layer.w_recurrent);
      f(layer.bias);
    }
    f(fake_repr);
    f(proj_w);
    f(proj_b);
  }

  template <typename F>
  void for_each_array(F&& f) const {
    const_cast<EncoderWeights*>(this)->for_each_array([&f](const Vec& a) { f(a); });
  }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for_each_array([&n](const Vec& a) { n += a.size(); });
    return n;
  }

  /// Checks the weights against the bound vocabulary and scorer hidden sizes.
  void require_compatible(std::size_t vocab, std::size_t language_hidden, std::size_t acoustic_hidden) const {
    if (dims.vocab != vocab || dims.language_hidden != language_hidden || dims.acoustic_hidden != acoustic_hidden)
      fail(Errc::DimMismatch, "weights (V=" + std::to_string(dims.vocab) + ", d_l=" +
                                  std::to_string(dims.language_hidden) + ", d_a=" +
                                  std::to_string(dims.acoustic_hidden) + ") vs scorers (V=" + std::to_string(vocab) +
                                  ", d_l=" + std::to_string(language_hidden) +
                                  ", d_a=" + std::to_string(acoustic_hidden) + ")");
  }

  std::string encode() const {
    Envelope env;
    env.header = {{"V", dims.vocab},
                  {"e", dims.embed},
                  {"r", dims.repr},
                  {"d_l", dims.language_hidden},
                  {"d_a", dims.acoustic_hidden},
                  {"layers", kEncoderLayers},
                  {"gate_order", "input,forget,candidate,output"},
                  {"query_concat", "language,acoustic"},
                  {"projection_bias", true},
                  {"provenance", provenance}};
    env.payload.reserve(parameter_count());
    for_each_array([&env](const Vec& a) {
      for (double v : a) env.payload.push_back(static_cast<float>(v));
    });
    return encode_envelope(kWeightMagic, env);
  }

  static EncoderWeights decode(std::string_view bytes, const std::string& origin = "<weights>") {
    Envelope env = decode_envelope(kWeightMagic, bytes, origin);
    EncoderDims d;
    std::string provenance;
    try {
      const auto& h = env.header;
      d.vocab = h.at("V").get<std::size_t>();
      d.embed = h.at("e").get<std::size_t>();
      d.repr = h.at("r").get<std::size_t>();
      d.language_hidden = h.at("d_l").get<std::size_t>();
      d.acoustic_hidden = h.at("d_a").get<std::size_t>();
      if (h.at("layers").get<std::size_t>() != kEncoderLayers) fail(Errc::BadDims, origin + ": layer count");
      if (h.contains("provenance")) provenance = h["provenance"].get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      fail(Errc::ParseError, origin + ": header: " + e.what());
    }
    EncoderWeights w = zeros(d);
    w.provenance = provenance;
    if (env.payload.size() < w.parameter_count())
      fail(Errc::TruncatedBody, origin + ": " + std::to_string(env.payload.size()) + " of " +
                                    std::to_string(w.parameter_count()) + " parameters present");
    if (env.payload.size() > w.parameter_count()) fail(Errc::ParseError, origin + ": trailing data");
    std::size_t at = 0;
    w.for_each_array([&](Vec& a) {
      for (double& v : a) v = env.payload[at++];
    });
    for (float f : env.payload)
      if (!std::isfinite(f)) fail(Errc::NonFiniteInput, origin + ": non-finite parameter");
    return w;
  }

  void save(const std::string& path) const { write_file_bytes(path, encode()); }
  static EncoderWeights load(const std::string& path) { return decode(read_file_bytes(path), path); }
};

namespace detail {

// y = W x + y, W is rows x x.size() row-major.
inline void matvec_accumulate(std::span<const double> w, std::span<const double> x, std::span<double> y) {
  const std::size_t cols = x.size();
  for (std::size_t r = 0; r < y.size(); ++r) {
    const double* row = w.data() + r * cols;
    double s = 0.0;
    for (std::size_t c = 0; c < cols; ++c) s += row[c] * x[c];
    y[r] += s;
  }
}

}  // namespace detail

/// Runs the three-layer recurrence over the keyword's token embeddings and
/// returns the last layer's hidden state after the final token.
inline Vec encode_keyword(const EncoderWeights& w, const Keyword& kw) {
  const std::size_t r = w.dims.repr;
  std::array<Vec, kEncoderLayers> h, c;
  for (std::size_t l = 0; l < kEncoderLayers; ++l) {
    h[l].assign(r, 0.0);
    c[l].assign(r, 0.0);
  }
  Vec gates(4 * r);
  for (TokenId tok : kw.token_ids) {
    if (tok >= w.dims.vocab)
      fail(Errc::TokenOutOfRange, "keyword token " + std::to_string(tok) + " outside embedding table");
    std::span<const double> x(w.embedding.data() + static_cast<std::size_t>(tok) * w.dims.embed, w.dims.embed);
    for (std::size_t l = 0; l < kEncoderLayers; ++l) {
      const auto& layer = w.layers[l];
      gates.assign(layer.bias.begin(), layer.bias.end());
      detail::matvec_accumulate(layer.w_input, x, gates);
      detail::matvec_accumulate(layer.w_recurrent, h[l], gates);
      for (std::size_t k = 0; k < r; ++k) {
        const double in = sigmoid(gates[k]);
        const double forget = sigmoid(gates[r + k]);
        const double cand = std::tanh(gates[2 * r + k]);
        const double out = sigmoid(gates[3 * r + k]);
        c[l][k] = forget * c[l][k] + in * cand;
        h[l][k] = out * std::tanh(c[l][k]);
      }
      x = h[l];
    }
  }
  return h[kEncoderLayers - 1];
}

/// (N+1) x r keyword representations; row 0 is the fake keyword.
struct PhraseTable {
  std::size_t repr = 0;
  Vec rows;

  std::size_t size() const noexcept { return repr == 0 ? 0 : rows.size() / repr; }
  std::span<const double> row(std::size_t i) const { return std::span(rows).subspan(i * repr, repr); }
};

inline PhraseTable build_phrase_table(const EncoderWeights& w, const KeywordList& list) {
  PhraseTable table;
  table.repr = w.dims.repr;
  table.rows.reserve((list.size() + 1) * table.repr);
  table.rows.insert(table.rows.end(), w.fake_repr.begin(), w.fake_repr.end());
  for (const auto& kw : list.keywords()) {
    const Vec rep = encode_keyword(w, kw);
    table.rows.insert(table.rows.end(), rep.begin(), rep.end());
  }
  return table;
}

struct PhraseStep {
  Vec query;
  Vec phrase_probs;  // N+1; index 0 is the fake keyword
};

inline Vec phrase_query(const EncoderWeights& w, std::span<const double> language_hidden,
                        std::span<const double> acoustic_hidden) {
  if (language_hidden.size() != w.dims.language_hidden || acoustic_hidden.size() != w.dims.acoustic_hidden)
    fail(Errc::DimMismatch, "hidden sizes (" + std::to_string(language_hidden.size()) + ", " +
                                std::to_string(acoustic_hidden.size()) + ") vs weights (" +
                                std::to_string(w.dims.language_hidden) + ", " +
                                std::to_string(w.dims.acoustic_hidden) + ")");
  Vec concat;
  concat.reserve(w.query_input());
  concat.insert(concat.end(), language_hidden.begin(), language_hidden.end());
  concat.insert(concat.end(), acoustic_hidden.begin(), acoustic_hidden.end());
  Vec q = w.proj_b;
  detail::matvec_accumulate(w.proj_w, concat, q);
  return q;
}

/// Softmax over query/representation dot products for every table row.
inline Vec phrase_softmax(std::span<const double> query, const PhraseTable& table) {
  if (query.size() != table.repr)
    fail(Errc::DimMismatch, "query size " + std::to_string(query.size()) + " vs table width " +
                                std::to_string(table.repr));
  Vec scores(table.size());
  for (std::size_t i = 0; i < scores.size(); ++i) scores[i] = dot(query, table.row(i));
  return softmax(scores);
}

inline PhraseStep phrase_probs(const EncoderWeights& w, std::span<const double> language_hidden,
                               std::span<const double> acoustic_hidden, const PhraseTable& table) {
  PhraseStep step;
  step.query = phrase_query(w, language_hidden, acoustic_hidden);
  step.phrase_probs = phrase_softmax(step.query, table);
  return step;
}

}  // namespace mgf
