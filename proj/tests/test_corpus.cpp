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

#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>

#include "m2s/audio.hpp"
#include "m2s/corpus.hpp"
#include "m2s/error.hpp"

namespace m2s {
namespace {

std::vector<Utterance> make_corpus(int n) {
  std::vector<Utterance> out;
  for (int i = 0; i < n; ++i) {
    Utterance u;
    u.id = "utt" + std::to_string(i);
    u.nam_path = "nam/" + u.id + ".wav";
    u.text = "text " + std::to_string(i);
    out.push_back(u);
  }
  return out;
}

TEST(Split, SizesUseRoundHalfUp) {
  const SplitSizes s = split_sizes(421, 0.13, 0.05);
  EXPECT_EQ(s.test, 55u);
  EXPECT_EQ(s.val, 18u);
  EXPECT_EQ(s.train, 348u);
  // 0.5 cases round up
  EXPECT_EQ(split_sizes(10, 0.25, 0.5).test, 3u);
  EXPECT_EQ(split_sizes(10, 0.25, 0.5).val, 4u);
  EXPECT_EQ(split_sizes(1, 0.13, 0.05).train, 1u);
  EXPECT_THROW(split_sizes(10, 1.2, 0.0), ValidationError);
  EXPECT_THROW(split_sizes(10, -0.1, 0.0), ValidationError);
}

TEST(Split, DeterministicDisjointAndOrdered) {
  const auto utts = make_corpus(421);
  const CorpusSplit a = split_corpus(utts, 5);
  const CorpusSplit b = split_corpus(utts, 5);
  const CorpusSplit c = split_corpus(utts, 6);
  EXPECT_EQ(a.test.size(), 55u);
  EXPECT_EQ(a.val.size(), 18u);
  EXPECT_EQ(a.train.size(), 348u);
  EXPECT_EQ(a.test, b.test);
  EXPECT_EQ(a.train, b.train);
  EXPECT_NE(a.test, c.test);

  std::set<std::string> ids;
  for (const auto* part : {&a.train, &a.val, &a.test}) {
    for (const auto& u : *part) ids.insert(u.id);
  }
  EXPECT_EQ(ids.size(), 421u);

  auto index_of = [](const Utterance& u) { return std::stoi(u.id.substr(3)); };
  for (const auto* part : {&a.train, &a.val, &a.test}) {
    EXPECT_TRUE(std::is_sorted(part->begin(), part->end(),
                               [&](const auto& x, const auto& y) {
                                 return index_of(x) < index_of(y);
                               }));
  }
  EXPECT_THROW(split_corpus({}, 1), ValidationError);
}

TEST(Manifest, RoundTrip) {
  auto utts = make_corpus(3);
  utts[1].whisper_path = "whisper/utt1.wav";
  utts[2].origin = Origin::kClone;
  utts[2].source_id = "lj001";
  utts[2].speaker = "nam";
  utts[2].duration_s = 1.25;
  const std::string text = format_manifest(utts);
  EXPECT_EQ(parse_manifest(text), utts);
  EXPECT_EQ(text.substr(0, 8), "{\"id\":\"u");

  const auto path = std::filesystem::temp_directory_path() / "m2s_manifest_test" / "m.jsonl";
  save_manifest(utts, path);
  EXPECT_EQ(load_manifest(path), utts);
  std::filesystem::remove_all(path.parent_path());
  EXPECT_THROW(load_manifest(path), IoError);
}

TEST(Manifest, ReportsLineOfBadRecord) {
  const std::string text =
      "{\"id\":\"a\",\"nam_path\":\"a.wav\",\"text\":\"hi\"}\n"
      "\n"
      "{\"id\":\"b\",\"nam_path\":\"b.wav\"}\n";
  try {
    parse_manifest(text);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
  EXPECT_THROW(parse_manifest("{not json}\n"), ParseError);
  EXPECT_THROW(parse_manifest("{\"id\":\"a\",\"nam_path\":\"a.wav\",\"text\":\"\"}\n"), ParseError);
}

TEST(Manifest, RejectsDuplicateIds) {
  const std::string text =
      "{\"id\":\"a\",\"nam_path\":\"a.wav\",\"text\":\"hi\"}\n"
      "{\"id\":\"a\",\"nam_path\":\"b.wav\",\"text\":\"yo\"}\n";
  EXPECT_THROW(parse_manifest(text), ValidationError);
}

TEST(Origin, StringRoundTrip) {
  for (Origin o : {Origin::kNatural, Origin::kSimulatedGt, Origin::kClone}) {
    EXPECT_EQ(origin_from_string(to_string(o)), o);
  }
  EXPECT_THROW(origin_from_string("bogus"), ValidationError);
}

TEST(ScanCorpus, ListsMissingAudioAndRejectsEmpty) {
  const auto root = std::filesystem::temp_directory_path() / "m2s_scan_test";
  std::filesystem::remove_all(root);
  std::filesystem::create_directories(root / "nam");
  EXPECT_THROW(scan_corpus(root), IoError);
  { std::ofstream(root / "transcripts.txt") << "\n"; }
  EXPECT_THROW(scan_corpus(root), ValidationError);
  AudioBuffer a;
  a.samples.assign(1600, 0.1);
  write_audio(a, root / "nam" / "u1.wav");
  { std::ofstream(root / "transcripts.txt") << "u1 hello there\nu2 gone\nu3 gone too\n"; }
  try {
    scan_corpus(root);
    FAIL();
  } catch (const IoError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("u2.wav"), std::string::npos);
    EXPECT_NE(msg.find("u3.wav"), std::string::npos);
  }
  { std::ofstream(root / "transcripts.txt") << "u1 hello there\n"; }
  const auto utts = scan_corpus(root);
  ASSERT_EQ(utts.size(), 1u);
  EXPECT_EQ(utts[0].text, "hello there");
  EXPECT_FALSE(utts[0].whisper_path.has_value());
  EXPECT_DOUBLE_EQ(utts[0].duration_s, 0.1);
  std::filesystem::remove_all(root);
}

}  // namespace
}  // namespace m2s
