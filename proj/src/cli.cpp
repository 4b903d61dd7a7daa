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

#include "m2s/cli.hpp"

#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "m2s/audio.hpp"
#include "m2s/error.hpp"
#include "m2s/pipeline.hpp"

namespace m2s {

namespace fs = std::filesystem;

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const MissingDependencyError*>(&e)) return kExitMissingDependency;
  if (dynamic_cast<const IoError*>(&e)) return kExitIo;
  if (dynamic_cast<const fs::filesystem_error*>(&e)) return kExitIo;
  return kExitValidation;
}

namespace {

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "pipeline config (JSON)")->required();
  cmd->add_option("--seed", c.seed, "override every seed in the config");
}

PipelineConfig resolve(const Common& c) {
  PipelineConfig cfg = load_pipeline_config(c.config);
  if (c.seed) {
    override_seed(cfg, *c.seed);
    cfg.validate();
  }
  return cfg;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"m2s: murmur-to-speech conversion toolkit", "m2s"};
  app.require_subcommand(1);

  Common common;
  auto* prepare = app.add_subcommand("prepare", "scan the corpus, write manifest and split");
  auto* simulate = app.add_subcommand("simulate-gt", "simulate ground-truth speech from whisper");
  auto* augment = app.add_subcommand("augment", "clone a speech corpus into the NAM voice");
  auto* train = app.add_subcommand("train", "train the Seq2Seq model on aligned pairs");
  auto* infer = app.add_subcommand("infer", "convert one NAM recording to speech");
  auto* evaluate = app.add_subcommand("evaluate", "score the test split (MCD, WER, CER)");
  auto* show = app.add_subcommand("config", "print the resolved config");
  auto* plot = app.add_subcommand("plot", "stacked mel-spectrogram image");
  for (auto* cmd : {prepare, simulate, augment, train, infer, evaluate, show}) {
    add_common(cmd, common);
  }

  std::optional<int> cap;
  std::optional<std::string> source;
  augment->add_option("--cap", cap, "use at most N source utterances")->check(CLI::NonNegativeNumber);
  augment->add_option("--source", source, "source speech manifest");

  bool resume = false;
  std::optional<int> max_steps;
  train->add_flag("--resume", resume, "continue from the last checkpoint");
  train->add_option("--max-steps", max_steps, "override train.max_steps")
      ->check(CLI::PositiveNumber);

  std::string input, output, speaker, checkpoint;
  infer->add_option("--input", input, "NAM audio (WAV)")->required();
  infer->add_option("--out", output, "output WAV")->required();
  infer->add_option("--speaker", speaker, "target voice (default: voices.inference)");
  infer->add_option("--checkpoint", checkpoint, "checkpoint (default: <output_dir>/checkpoint.m2sc)");

  bool csv = false, self_test = false;
  evaluate->add_flag("--csv", csv, "also write report.csv");
  evaluate->add_flag("--self-test", self_test, "score references against themselves");

  std::vector<std::string> plot_inputs;
  std::string plot_out;
  plot->add_option("inputs", plot_inputs, "audio files, one panel each");
  plot->add_option("--out", plot_out, "output PNG")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (plot->parsed()) {
      std::vector<fs::path> paths(plot_inputs.begin(), plot_inputs.end());
      plot_spectrograms(paths, plot_out);
      out << plot_out << "\n";
      return kExitOk;
    }
    PipelineConfig cfg = resolve(common);
    if (show->parsed()) {
      out << format_pipeline_config(cfg);
      return kExitOk;
    }
    if (cap) cfg.augment_cap = *cap;
    if (max_steps) cfg.train.max_steps = *max_steps;
    Pipeline pipeline(std::move(cfg), &err);
    if (prepare->parsed()) {
      const PrepareResult r = pipeline.prepare();
      out << r.manifest.string() << "\n" << r.split.string() << "\n";
    } else if (simulate->parsed()) {
      const SimulateResult r = pipeline.simulate_gt();
      if (r.skipped > 0) {
        err << "warning: " << r.skipped << " utterance(s) without whisper audio skipped\n";
      }
      out << r.manifest.string() << "\n";
    } else if (augment->parsed()) {
      const AugmentResult r =
          pipeline.augment(source ? std::optional<fs::path>(*source) : std::nullopt);
      out << r.manifest.string() << "\n";
    } else if (train->parsed()) {
      const TrainResult r = pipeline.train(resume);
      out << r.checkpoint.string() << "\n";
    } else if (infer->parsed()) {
      const fs::path ckpt_path = checkpoint.empty() ? pipeline.checkpoint_path() : fs::path(checkpoint);
      const Checkpoint ckpt = load_checkpoint(ckpt_path);
      const InferResult r = pipeline.infer(
          read_audio(input), speaker.empty() ? pipeline.config().voices.inference : speaker, ckpt);
      write_audio(r.audio, output);
      out << output << "\n";
    } else if (evaluate->parsed()) {
      pipeline.evaluate(self_test, csv);
      out << pipeline.report_path(false).string() << "\n";
      if (csv) out << pipeline.report_path(true).string() << "\n";
    }
    return kExitOk;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e);
  }
}

}  // namespace m2s
