#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "ovalcert/hash.hpp"
#include "ovalcert/manifest.hpp"

using namespace ovalcert;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("ovalcert-manifest-" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

}  // namespace

TEST(Manifest, Sha256KnownAnswers) {
  EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  const fs::path d = fresh_dir("sha");
  write_file(d / "x", "abc");
  EXPECT_EQ(sha256_file(d / "x"), sha256_hex("abc"));
  EXPECT_THROW(sha256_file(d / "missing"), std::runtime_error);
}

TEST(Manifest, RecordRoundTrip) {
  const fs::path d = fresh_dir("roundtrip");
  write_file(d / "in.txt", "input");
  write_file(d / "out.txt", "output");
  StageRecord r;
  r.stage = "gen";
  r.params = {{"n", "4"}, {"blocks", "2..4"}};
  r.inputs = {artifact("in", d / "in.txt", d)};
  r.outputs = {artifact("out", d / "out.txt", d)};
  r.results = {{"count", "3"}, {"list", "[1,2]"}, {"ok", "true"}};
  r.seconds = 1.5;
  r.jobs = 2;
  r.seed = 42;
  append_record(d / "manifest.jsonl", r);
  append_record(d / "manifest.jsonl", r);
  const auto back = read_manifest(d / "manifest.jsonl");
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].stage, "gen");
  EXPECT_EQ(back[0].params, r.params);
  EXPECT_EQ(back[0].inputs, r.inputs);
  EXPECT_EQ(back[0].outputs, r.outputs);
  EXPECT_EQ(back[0].inputs[0].path, "in.txt");
  EXPECT_EQ(back[0].results.at("list"), "[1,2]");
  EXPECT_EQ(back[0].seed, 42u);
  EXPECT_EQ(back[0].jobs, 2);
  EXPECT_TRUE(verify_manifest(d / "manifest.jsonl").empty());
}

TEST(Manifest, VerifyCatchesTamperingAndLoss) {
  const fs::path d = fresh_dir("verify");
  write_file(d / "a", "one");
  write_file(d / "b", "two");
  StageRecord first{.stage = "first", .outputs = {artifact("a", d / "a", d)}};
  StageRecord second{.stage = "second", .inputs = {artifact("a", d / "a", d)},
                     .outputs = {artifact("b", d / "b", d)}};
  append_record(d / "m.jsonl", first);
  append_record(d / "m.jsonl", second);
  EXPECT_TRUE(verify_manifest(d / "m.jsonl").empty());

  write_file(d / "b", "changed");
  auto problems = verify_manifest(d / "m.jsonl");
  ASSERT_EQ(problems.size(), 1u);
  EXPECT_NE(problems[0].find("does not match"), std::string::npos);

  fs::remove(d / "b");
  problems = verify_manifest(d / "m.jsonl");
  ASSERT_EQ(problems.size(), 1u);
  EXPECT_NE(problems[0].find("missing"), std::string::npos);
}

TEST(Manifest, RejectsCorruptLines) {
  const fs::path d = fresh_dir("corrupt");
  write_file(d / "m.jsonl", "{\"stage\": 3}\n");
  EXPECT_THROW(read_manifest(d / "m.jsonl"), std::runtime_error);
  write_file(d / "m.jsonl", "not json\n");
  EXPECT_THROW(read_manifest(d / "m.jsonl"), std::runtime_error);
  EXPECT_THROW(read_manifest(d / "absent.jsonl"), std::runtime_error);
}
