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

// Decodes one utterance with seeded synthetic scorers and a small keyword
// list, then prints the n-best list and a biased error report against a
// made-up reference.

#include <iostream>
#include <string>
#include <vector>

#include "mgfusion/mgfusion.hpp"

int main() {
  const mgf::Vocabulary vocab = mgf::Vocabulary::from_characters("abcdefghijklmnopqrstuvwxyz ");
  const mgf::Tokenizer tokenizer(vocab);

  const std::vector<std::string> surfaces{"elisa toffoli", "yale", "new york city"};
  const mgf::KeywordList list = mgf::build_keyword_list(surfaces, tokenizer);
  const mgf::ContextPrompt prompt = mgf::render_prompt(list);

  // The language scorer sees the rendered prompt; the acoustic one does not.
  auto acoustic = mgf::open_synthetic(11, {vocab.size(), 16}, mgf::ScorerKind::Acoustic);
  auto language = mgf::open_synthetic(12, {vocab.size(), 16}, mgf::ScorerKind::Language, prompt.rendered);

  // Untrained encoder; sharpen the query projection so copies get real mass.
  mgf::EncoderWeights weights = mgf::EncoderWeights::random_uniform({vocab.size(), 32, 32, 16, 16}, 3);
  for (double& w : weights.proj_w) w *= 20.0;

  mgf::DecodeConfig cfg;
  cfg.beam_width = 4;
  cfg.max_len = 24;
  cfg.n_best = 3;
  const auto nbest = mgf::beam_search(*acoustic, *language, weights, list, cfg, vocab.eos_id());

  std::cout << "prompt: " << prompt.rendered << "\n\n";
  for (const auto& hyp : nbest) std::cout << mgf::hypothesis_to_json(hyp, tokenizer).dump() << "\n";

  const std::string reference = "send a message to elisa toffoli";
  const std::string hypothesis = tokenizer.detokenize(nbest.front().tokens);
  const auto report = mgf::biased_report(mgf::normalize(reference, mgf::Language::En),
                                         mgf::normalize(hypothesis, mgf::Language::En), list, mgf::Unit::Word);
  std::cout << "\n" << report.to_json().dump(2) << "\n";
  return 0;
}
