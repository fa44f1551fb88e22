/*
 * Copyright 2026 The kge Authors.
 *
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

// Drives the built `kge` executable end to end.

#include <sys/wait.h>

#include <cstdio>
#include <fstream>
#include <iterator>
#include <limits>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "kge/io.h"
#include "kge/synthetic.h"
#include "test_support.h"

#ifndef KGE_BINARY
#error "KGE_BINARY must name the kge executable"
#endif

namespace kge {
namespace {

struct Result {
  int code = -1;
  std::string output;
};

Result Kge(const std::string& args) {
  const std::string command = std::string(KGE_BINARY) + " " + args + " 2>&1";
  Result r;
  FILE* pipe = popen(command.c_str(), "r");
  if (pipe == nullptr) return r;
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof(buf), pipe)) > 0) r.output.append(buf, n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string Slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

void WriteFile(const std::string& path, const std::string& text) {
  std::ofstream(path, std::ios::binary) << text;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    WorldOptions o;
    o.people = 30;
    o.cities = 6;
    o.companies = 3;
    o.countries = 3;
    const Dataset d = WorldDataset(o);
    WriteFile(train_, FormatTriples(d.train, d.vocabulary));
    WriteFile(valid_, FormatTriples(d.valid, d.vocabulary));
    WriteFile(test_, FormatTriples(d.test, d.vocabulary));
  }

  std::string Data() const {
    return "--train " + train_ + " --valid " + valid_ + " --test " + test_;
  }

  testing::TempDir dir_;
  std::string train_ = dir_.file("train.tsv");
  std::string valid_ = dir_.file("valid.tsv");
  std::string test_ = dir_.file("test.tsv");
};

TEST_F(CliTest, UsageErrorsExitOne) {
  EXPECT_EQ(Kge("").code, 1);
  EXPECT_EQ(Kge("frobnicate").code, 1);
  EXPECT_EQ(Kge("train " + Data() + " --model foo --checkpoint x").code, 1);
  EXPECT_EQ(Kge("train " + Data()).code, 1) << "missing --checkpoint";
  EXPECT_EQ(Kge("params --model transe --dim-e 0").code, 1);
  EXPECT_EQ(Kge("train " + Data() + " --checkpoint " + dir_.file("c") +
                " --normalize-projections maybe")
                .code,
            1);
  EXPECT_EQ(Kge("--help").code, 0);
}

TEST_F(CliTest, DataErrorsExitTwo) {
  EXPECT_EQ(Kge("prepare --train " + dir_.file("missing.tsv")).code, 2);
  const std::string bad = dir_.file("bad.tsv");
  WriteFile(bad, "a\tr\tb\nonly two\tfields\n");
  const Result r = Kge("prepare --train " + bad);
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.output.find("bad.tsv:2"), std::string::npos) << r.output;
  // Corrupted checkpoint.
  const std::string ckpt = dir_.file("junk.kgec");
  WriteFile(ckpt, "KGEC garbage");
  EXPECT_EQ(Kge("eval " + Data() + " --checkpoint " + ckpt).code, 2);
}

TEST_F(CliTest, NonFiniteParametersExitThree) {
  const Dataset d = LoadDataset(train_, valid_, test_);
  EnergyConfig c;
  c.dim_e = c.dim_r = 4;
  std::mt19937_64 rng(1);
  ModelParams p = InitModel(ModelKind::kTransE, c, d.vocabulary.num_entities(),
                            d.vocabulary.num_relations(), rng);
  p.tensor(TensorId::kEntity).Row(0)[0] =
      std::numeric_limits<double>::quiet_NaN();
  const std::string ckpt = dir_.file("nan.kgec");
  SaveCheckpoint(p, MakeMetadata(p, d.vocabulary), ckpt);
  const Result r = Kge("eval " + Data() + " --checkpoint " + ckpt);
  EXPECT_EQ(r.code, 3) << r.output;
}

TEST_F(CliTest, EndToEndPipeline) {
  Result r = Kge("prepare " + Data() + " --stats-out " + dir_.file("stats"));
  ASSERT_EQ(r.code, 0) << r.output;
  EXPECT_NE(Slurp(dir_.file("stats")).find("lives_in"), std::string::npos);

  // TransE, then TransF initialised from it.
  const std::string transe = dir_.file("transe.kgec");
  const std::string common =
      " --dim-e 8 --bases 2 --batch-size 50 --lr 0.01 --seed 3 ";
  r = Kge("train " + Data() + common + "--model transe --epochs 5 "
          "--checkpoint " + transe + " --log " + dir_.file("transe.log"));
  ASSERT_EQ(r.code, 0) << r.output;
  std::istringstream log(Slurp(dir_.file("transe.log")));
  std::string line;
  int lines = 0;
  while (std::getline(log, line)) {
    if (!line.empty() && line[0] != '#') ++lines;
  }
  EXPECT_GE(lines, 5);

  const std::string transf = dir_.file("transf.kgec");
  r = Kge("train " + Data() + common + "--model transf --epochs 3 "
          "--init-checkpoint " + transe + " --as transf-init --checkpoint " +
          transf);
  ASSERT_EQ(r.code, 0) << r.output;
  EXPECT_EQ(LoadCheckpoint(transf).params.kind(), ModelKind::kTransF);

  // A TransE checkpoint evaluated as its TransF initialisation ranks the
  // same, since zero coefficients leave the projections as the identity.
  r = Kge("eval " + Data() + " --checkpoint " + transe + " --report " +
          dir_.file("e.txt"));
  ASSERT_EQ(r.code, 0) << r.output;
  r = Kge("eval " + Data() + " --checkpoint " + transe +
          " --as transf-init --bases 2 --report " + dir_.file("f.txt"));
  ASSERT_EQ(r.code, 0) << r.output;
  auto line_of = [](const std::string& text, const std::string& key) {
    const std::size_t at = text.find("\n" + key + "\t");
    return at == std::string::npos ? std::string()
                                   : text.substr(at, text.find('\n', at + 1) - at);
  };
  const std::string e_mrr = line_of(Slurp(dir_.file("e.txt")), "filtered.mrr");
  EXPECT_FALSE(e_mrr.empty());
  EXPECT_EQ(e_mrr, line_of(Slurp(dir_.file("f.txt")), "filtered.mrr"));

  r = Kge("eval " + Data() + " --checkpoint " + transf + " --split valid "
          "--tie-policy pessimistic --report-json " + dir_.file("r.json"));
  ASSERT_EQ(r.code, 0) << r.output;
  EXPECT_NE(Slurp(dir_.file("r.json")).find("\"pessimistic\""),
            std::string::npos);

  r = Kge("export-relations " + Data() + " --checkpoint " + transf +
          " --out " + dir_.file("rel.tsv"));
  ASSERT_EQ(r.code, 0) << r.output;
  EXPECT_EQ(Slurp(dir_.file("rel.tsv")).rfind("relation\t", 0), 0u);

  r = Kge("bench --models transe transf --bases 1 2 --entities 50 "
          "--relations 4 --triples 300 --dim 8 --epochs 1 --batch-size 100");
  ASSERT_EQ(r.code, 0) << r.output;
  EXPECT_NE(r.output.find("transf\t2\t"), std::string::npos) << r.output;

  r = Kge("params --model transf --dim-e 100 --bases 5");
  ASSERT_EQ(r.code, 0) << r.output;
  EXPECT_EQ(r.output, "1743050\n");
}

TEST_F(CliTest, TrainingIsReproducible) {
  const std::string args =
      "train " + Data() +
      " --model transh --dim-e 8 --epochs 3 --batch-size 50 --seed 9 ";
  ASSERT_EQ(Kge(args + "--checkpoint " + dir_.file("a")).code, 0);
  ASSERT_EQ(Kge(args + "--checkpoint " + dir_.file("b")).code, 0);
  EXPECT_EQ(Slurp(dir_.file("a")), Slurp(dir_.file("b")));
  // 32-bit storage halves the payload and still loads.
  ASSERT_EQ(Kge(args + "--storage f32 --checkpoint " + dir_.file("c")).code, 0);
  EXPECT_LT(Slurp(dir_.file("c")).size(), Slurp(dir_.file("a")).size());
  EXPECT_EQ(LoadCheckpoint(dir_.file("c")).params.kind(), ModelKind::kTransH);
  EXPECT_EQ(Kge(args + "--storage f16 --checkpoint " + dir_.file("d")).code, 1);
}

}  // namespace
}  // namespace kge
