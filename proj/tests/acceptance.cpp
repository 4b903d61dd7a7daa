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

// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ctc_oracle.hpp"
#include "dtw_oracle.hpp"
#include "gradcheck.hpp"
#include "m2s/cli.hpp"
#include "m2s/corpus.hpp"
#include "m2s/evaluate.hpp"
#include "m2s/parallel_pair.hpp"
#include "m2s/seq2seq.hpp"
#include "m2s/toy_world.hpp"
#include "metric_oracle.hpp"
#include "pipeline_scratch.hpp"

namespace {

using namespace m2s;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

int failures = 0;

void report(int id, bool ok, const std::string& detail) {
  std::printf("%s %2d %s\n", ok ? "PASS" : "FAIL", id, detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

template <typename... Args>
std::string fmt(const char* f, Args... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

void criterion_dtw() {
  const auto t0 = Clock::now();
  const testing::DtwSweepReport r = testing::dtw_sweep(20260117, 600);
  const double secs = seconds_since(t0);
  report(1, r.pairs >= 500 && r.full_mismatches == 0 && r.exact_mismatches == 0 &&
                r.below_optimum == 0 && secs < 30.0,
         fmt("dtw oracle: %d pairs, max |fastdtw - dtw_full| %.1e, radius-1 below optimum %d, "
             "%.1f s",
             r.pairs, r.max_exact_diff, r.below_optimum, secs));
}

void criterion_ctc() {
  Rng rng(424242);
  int checked = 0;
  double worst = 0.0;
  for (int c = 0; checked < 300 && c < 2000; ++c) {
    const int t_len = 1 + static_cast<int>(rng.index(6));
    const int v = 2 + static_cast<int>(rng.index(3));
    const int len = static_cast<int>(rng.index(4));
    std::vector<int> target;
    for (int i = 0; i < len; ++i) target.push_back(1 + static_cast<int>(rng.index(v - 1)));
    if (ctc_min_frames(target) > t_len) continue;
    Matrix logits(t_len, v);
    for (Eigen::Index i = 0; i < logits.size(); ++i) logits.data()[i] = 3.0 * rng.normal();
    worst = std::max(worst, std::abs(ctc_loss(logits, target) -
                                     testing::brute_force_ctc(logits, target, 0)));
    ++checked;
  }
  report(2, checked >= 200 && worst <= 1e-6,
         fmt("ctc oracle: %d cases (T<=6, |target|<=3, |vocab|<=4), max error %.1e", checked,
             worst));
}

void criterion_gradient() {
  double worst = 0.0;
  int sampled = 0;
  for (int t : {5, 9, 12}) {
    const testing::GradCheckReport r = testing::check_total_loss_gradient(900 + t, t, 30);
    worst = std::max(worst, r.max_rel_error);
    sampled += r.sampled;
  }
  const Seq2SeqConfig c = testing::small_config();
  report(3, sampled >= 50 && worst <= 1e-4 && c.alpha_ctc == 0.001 && c.alpha_mse == 1.0,
         fmt("gradient check: %d parameters, 2 layers hidden 16, max relative error %.1e", sampled,
             worst));
}

void criterion_mse() {
  Rng rng(5768);
  double worst = 0.0;
  for (int c = 0; c < 20; ++c) {
    Matrix a(5, 768), b(5, 768);
    for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = rng.normal();
    for (Eigen::Index i = 0; i < b.size(); ++i) b.data()[i] = rng.normal();
    double sum = 0.0;
    for (int t = 0; t < 5; ++t) {
      for (int d = 0; d < 768; ++d) sum += (a(t, d) - b(t, d)) * (a(t, d) - b(t, d));
    }
    worst = std::max(worst, std::abs(mse_loss(a, b) - sum / 5.0));
  }
  Matrix pred(1, 2), target(1, 2);
  pred << 1.0, 1.0;
  target << 0.0, 0.0;
  const double hand = mse_loss(pred, target);
  report(4, worst <= 1e-9 && hand == 2.0,
         fmt("mse: 5x768 max error %.1e, hand example %.17g", worst, hand));
}

void criterion_schedule() {
  const TrainConfig tr;
  const std::vector<std::pair<int, double>> want = {
      {0, 4.4e-2}, {2999, 4.4e-2}, {3000, 1.32e-2}, {4000, 3.96e-3}, {5000, 1.188e-3}};
  double worst = 0.0;
  for (const auto& [step, lr] : want) worst = std::max(worst, std::abs(lr_at_step(step, tr) - lr) / lr);
  report(5, worst <= 1e-12,
         fmt("schedule: lr at 0/3000/4000/5000 = %.6g/%.6g/%.6g/%.6g, max relative error %.1e",
             lr_at_step(0, tr), lr_at_step(3000, tr), lr_at_step(4000, tr), lr_at_step(5000, tr),
             worst));
}

void criterion_split() {
  std::vector<Utterance> utts;
  for (int i = 0; i < 421; ++i) {
    utts.push_back({"u" + std::to_string(i), "u.wav", std::nullopt, "t", 0.0, {}, {}, {}});
  }
  const CorpusSplit a = split_corpus(utts, 1234);
  const CorpusSplit b = split_corpus(utts, 1234);
  const bool same = a.train == b.train && a.val == b.val && a.test == b.test;
  report(6, a.test.size() == 55 && a.val.size() == 18 && a.train.size() == 348 && same,
         fmt("split: N=421 -> test %zu, val %zu, train %zu, repeat %s", a.test.size(),
             a.val.size(), a.train.size(), same ? "identical" : "differs"));
}

void criterion_metrics() {
  const testing::MetricSweepReport sweep = testing::metric_sweep(77, 3000);
  double mcd_err = 0.0;
  for (double delta : {0.05, 0.3, 1.7}) {
    mcd_err = std::max(mcd_err, testing::mcd_injection_error(delta, 40, 40));
    mcd_err = std::max(mcd_err, testing::mcd_injection_error(delta, 25, 60));
  }
  const AudioBuffer a = toy::render("mo tl", toy::voice_by_name("lj"), 3, 4);
  const double id_mcd = compute_mcd(a, a);
  const double id_wer = word_error_rate("mo tl sl", "mo tl sl");
  const double id_cer = char_error_rate("mo tl sl", "mo tl sl");
  report(7, sweep.word_mismatches == 0 && sweep.char_mismatches == 0 && mcd_err <= 1e-9 &&
                id_mcd == 0.0 && id_wer == 0.0 && id_cer == 0.0,
         fmt("metrics: %d edit-distance cases, %d/%d mismatches, mcd injection error %.1e, "
             "identity %g/%g/%g",
             sweep.cases, sweep.word_mismatches, sweep.char_mismatches, mcd_err, id_mcd, id_wer,
             id_cer));
}

// ---- toy pipeline ----

int cli(const std::vector<std::string>& args, std::string* out = nullptr) {
  std::vector<const char*> argv = {"m2s"};
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream o, e;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), o, e);
  if (code != 0) std::cerr << "m2s";
  if (code != 0) {
    for (const auto& a : args) std::cerr << ' ' << a;
    std::cerr << " -> " << code << "\n" << e.str();
  }
  if (out) *out = o.str();
  return code;
}

PipelineConfig toy_config(const fs::path& corpora, const fs::path& run) {
  PipelineConfig c = load_pipeline_config(M2S_TOY_CONFIG);
  c.paths.corpus_root = corpora / "corpus";
  c.paths.reference_root = corpora / "ref";
  c.paths.cache_dir = run / "cache";
  c.paths.output_dir = run / "out";
  return c;
}

struct ChainResult {
  bool ok = false;
  double seconds = 0.0;
};

// prepare -> simulate-gt -> augment -> train -> infer -> evaluate
ChainResult run_chain(const fs::path& cfg, const fs::path& infer_in, const fs::path& infer_out) {
  const std::string c = cfg.string();
  const auto t0 = Clock::now();
  ChainResult r;
  r.ok = cli({"prepare", "--config", c}) == 0 && cli({"simulate-gt", "--config", c}) == 0 &&
         cli({"augment", "--config", c}) == 0 && cli({"train", "--config", c}) == 0 &&
         cli({"infer", "--config", c, "--input", infer_in.string(), "--out",
              infer_out.string()}) == 0 &&
         cli({"evaluate", "--config", c, "--csv"}) == 0;
  r.seconds = seconds_since(t0);
  return r;
}

// Relative path -> bytes of every artifact under `root`. Manifests hold
// absolute paths, so they are left out.
std::map<std::string, std::string> artifacts(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (!e.is_regular_file() || e.path().extension() == ".jsonl") continue;
    out[fs::relative(e.path(), root).generic_string()] = testing::read_bytes(e.path());
  }
  return out;
}

void toy_pipeline(const fs::path& root) {
  const fs::path corpora = root / "corpora";
  toy::CorpusOptions nam;
  nam.utterances = 20;
  toy::write_nam_corpus(corpora / "corpus", nam);
  toy::CorpusOptions ref;
  ref.utterances = 20;
  ref.seed = 1007;
  ref.id_prefix = "ref";
  toy::write_reference_corpus(corpora / "ref", {"lj", "alt"}, ref);

  const fs::path run_a = root / "run_a";
  const fs::path run_b = root / "run_b";
  for (const fs::path& run : {run_a, run_b}) {
    fs::create_directories(run);
    testing::write_config(toy_config(corpora, run), run / "toy.json");
  }
  const fs::path infer_in = corpora / "corpus" / "nam" / "nam_001.wav";

  const ChainResult a = run_chain(run_a / "toy.json", infer_in, run_a / "out" / "infer.wav");
  if (!a.ok) {
    report(8, false, "toy pipeline: CLI chain failed");
    report(9, false, "alignment contract: no augment output");
    report(10, false, "determinism: first run failed");
    return;
  }

  // Same seeds and caches, CTC term switched off.
  PipelineConfig off = toy_config(corpora, run_a);
  off.seq2seq.alpha_ctc = 0.0;
  off.paths.output_dir = run_a / "out_ctc_off";
  testing::write_config(off, run_a / "toy_ctc_off.json");
  const bool off_ok = cli({"train", "--config", (run_a / "toy_ctc_off.json").string()}) == 0 &&
                      cli({"evaluate", "--config", (run_a / "toy_ctc_off.json").string()}) == 0;

  std::ifstream log(run_a / "out" / "train_log.tsv");
  std::string line;
  std::vector<double> totals;
  std::getline(log, line);
  while (std::getline(log, line)) {
    std::istringstream row(line);
    double step, lr, mse, ctc, total;
    row >> step >> lr >> mse >> ctc >> total;
    totals.push_back(total);
  }
  const double ratio = totals.empty() ? 1.0 : totals.back() / totals.front();
  const auto on_report =
      nlohmann::json::parse(testing::read_bytes(run_a / "out" / "report.json"));
  const double cer_on = on_report.at("cer_pct").get<double>();
  const double cer_off =
      off_ok ? nlohmann::json::parse(testing::read_bytes(run_a / "out_ctc_off" / "report.json"))
                   .at("cer_pct")
                   .get<double>()
             : -1.0;
  report(8, a.seconds < 300.0 && totals.size() == 300 && ratio < 0.5 && off_ok && cer_on <= cer_off,
         fmt("toy pipeline: chain %.1f s, %zu steps, loss %.4g -> %.4g (x%.3f), CER ctc on %.2f%% "
             "vs off %.2f%% (MCD %.2f dB, WER %.2f%%)",
             a.seconds, totals.size(), totals.empty() ? 0.0 : totals.front(),
             totals.empty() ? 0.0 : totals.back(), ratio, cer_on, cer_off,
             on_report.at("mcd_db").get<double>(), on_report.at("wer_pct").get<double>()));

  int pairs = 0, equal = 0;
  for (const auto& e : fs::recursive_directory_iterator(run_a / "cache" / "augment")) {
    if (e.path().extension() != ".m2sp") continue;
    const ParallelPair p = read_pair(e.path());
    ++pairs;
    if (p.aligned && p.source_length() == p.target.length()) ++equal;
  }
  report(9, pairs > 0 && equal == pairs,
         fmt("alignment contract: %d/%d augmented pairs equal-length", equal, pairs));

  const ChainResult b = run_chain(run_b / "toy.json", infer_in, run_b / "out" / "infer.wav");
  if (!b.ok) {
    report(10, false, "determinism: second run failed");
    return;
  }
  const auto cache_a = artifacts(run_a / "cache");
  const auto cache_b = artifacts(run_b / "cache");
  const auto out_a = artifacts(run_a / "out");
  const auto out_b = artifacts(run_b / "out");
  int wavs = 0;
  for (const auto* m : {&cache_a, &out_a}) {
    for (const auto& [k, v] : *m) wavs += k.ends_with(".wav");
  }
  const bool same = cache_a == cache_b && out_a == out_b && out_a.contains("checkpoint.m2sc") &&
                    out_a.contains("report.json") && out_a.contains("report.csv");
  std::size_t differing = 0;
  for (const auto& [k, v] : out_a) differing += !out_b.contains(k) || out_b.at(k) != v;
  for (const auto& [k, v] : cache_a) differing += !cache_b.contains(k) || cache_b.at(k) != v;
  report(10, same,
         fmt("determinism: %zu artifacts (%d wav, checkpoint, reports) compared, %zu differ",
             cache_a.size() + out_a.size(), wavs, differing));
}

}  // namespace

int main() {
  criterion_dtw();
  criterion_ctc();
  criterion_gradient();
  criterion_mse();
  criterion_schedule();
  criterion_split();
  criterion_metrics();
  {
    testing::ScratchDir dir("acceptance");
    try {
      toy_pipeline(dir.path());
    } catch (const std::exception& e) {
      std::cerr << "toy pipeline: " << e.what() << "\n";
      report(8, false, std::string("toy pipeline: ") + e.what());
    }
  }
  std::printf("%s: %d criteria failed\n", failures ? "FAIL" : "PASS", failures);
  return failures ? 1 : 0;
}
