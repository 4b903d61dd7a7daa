// Copyright (c) 2026 The m2s Authors
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

// Writes a synthetic NAM corpus and a matching multi-speaker reference corpus.

#include <cstdio>
#include <iostream>

#include <CLI11.hpp>

#include "m2s/cli.hpp"
#include "m2s/toy_world.hpp"

int main(int argc, char** argv) {
  CLI::App app{"generate a toy corpus for the m2s pipeline", "m2s-toy-corpus"};
  std::string nam_root, ref_root;
  int utterances = 20, references = 20;
  std::uint64_t seed = 7;
  std::vector<std::string> speakers = {"lj", "alt"};
  int drop_whisper = 0;
  app.add_option("--nam", nam_root, "NAM corpus directory")->required();
  app.add_option("--reference", ref_root, "reference speech corpus directory");
  app.add_option("-n,--utterances", utterances, "NAM utterances")->check(CLI::PositiveNumber);
  app.add_option("--reference-utterances", references, "utterances per reference speaker")
      ->check(CLI::PositiveNumber);
  app.add_option("--speakers", speakers, "reference voices");
  app.add_option("--seed", seed, "corpus seed");
  app.add_option("--drop-whisper", drop_whisper, "delete whisper audio of the last N utterances")
      ->check(CLI::NonNegativeNumber);
  CLI11_PARSE(app, argc, argv);
  try {
    m2s::toy::CorpusOptions opts;
    opts.utterances = utterances;
    opts.seed = seed;
    m2s::toy::write_nam_corpus(nam_root, opts);
    for (int i = 0; i < drop_whisper && i < utterances; ++i) {
      char id[32];
      std::snprintf(id, sizeof id, "%s_%03d", opts.id_prefix.c_str(), utterances - i);
      std::filesystem::remove(std::filesystem::path(nam_root) / "whisper" / (std::string(id) + ".wav"));
    }
    if (!ref_root.empty()) {
      m2s::toy::CorpusOptions ref;
      ref.utterances = references;
      ref.seed = seed + 1000;
      ref.id_prefix = "ref";
      m2s::toy::write_reference_corpus(ref_root, speakers, ref);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return m2s::exit_code_for(e);
  }
  return 0;
}
