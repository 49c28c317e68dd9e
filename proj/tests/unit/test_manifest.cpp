#include <doctest.h>

#include <fstream>

#include "frodo/error.hpp"
#include "frodo/manifest.hpp"
#include "frodo/tensor_io.hpp"
#include "test_support.hpp"

using namespace frodo;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected frodo::Error");
  return ErrorCode::InvalidArgument;
}

const std::string kHeader = "sample_id,label,L1,L2,L3,L4,L5,softmax\n";

}  // namespace

TEST_CASE("two labeled rows parse in order") {
  const auto m = parse_manifest(kHeader +
                                "a,in,,,a3.ften,,,a_sm.ften\n"
                                "b,ood,b1.ften,,b3.ften,,,\n");
  REQUIRE(m.records.size() == 2);
  CHECK(m.records[0].sample_id == "a");
  CHECK(m.records[0].label == SampleLabel::In);
  CHECK(m.records[0].tensor_paths.size() == 1);
  CHECK(m.records[0].tensor_paths.at(Layer::L3) == "a3.ften");
  CHECK(m.records[0].softmax_path == std::filesystem::path("a_sm.ften"));
  CHECK(m.records[1].label == SampleLabel::Ood);
  CHECK(m.records[1].tensor_paths.size() == 2);
  CHECK_FALSE(m.records[1].softmax_path.has_value());
}

TEST_CASE("columns are located by name and CRLF is accepted") {
  const auto m = parse_manifest(
      "label,sample_id,softmax,L5,L4,L3,L2,L1\r\n"
      "unlabeled,x,,,,x3.ften,,\r\n");
  REQUIRE(m.records.size() == 1);
  CHECK(m.records[0].sample_id == "x");
  CHECK(m.records[0].label == SampleLabel::Unlabeled);
  CHECK(m.records[0].tensor_paths.at(Layer::L3) == "x3.ften");
}

TEST_CASE("duplicate sample ids are rejected") {
  CHECK(code_of([] { parse_manifest(kHeader + "a,in,,,,,,\na,ood,,,,,,\n"); }) ==
        ErrorCode::DuplicateSample);
}

TEST_CASE("label tokens are strict") {
  CHECK(code_of([] { parse_manifest(kHeader + "a,IN,,,,,,\n"); }) == ErrorCode::BadLabel);
  CHECK(code_of([] { parse_manifest(kHeader + "a,,,,,,,\n"); }) == ErrorCode::BadLabel);
  CHECK(code_of([] { parse_manifest(kHeader + "a,in ,,,,,,\n"); }) == ErrorCode::BadLabel);
}

TEST_CASE("missing layer column is MissingColumn") {
  CHECK(code_of([] { parse_manifest("sample_id,label,L1,L2,L4,L5,softmax\n"); }) ==
        ErrorCode::MissingColumn);
  CHECK(code_of([] { parse_manifest(""); }) == ErrorCode::MissingColumn);
}

TEST_CASE("rows with the wrong field count are malformed") {
  CHECK(code_of([] { parse_manifest(kHeader + "a,in,,,\n"); }) == ErrorCode::MalformedRow);
  CHECK(code_of([] { parse_manifest(kHeader + ",in,,,,,,\n"); }) == ErrorCode::MalformedRow);
}

TEST_CASE("write then read preserves records and order") {
  testing::TempDir dir;
  Manifest m;
  for (int i = 9; i >= 0; --i) {
    ManifestRecord r;
    r.sample_id = "s" + std::to_string(i);
    r.label = i % 3 == 0 ? SampleLabel::Ood : (i % 3 == 1 ? SampleLabel::In : SampleLabel::Unlabeled);
    r.tensor_paths.emplace(Layer::L2, "t/" + r.sample_id + ".ften");
    if (i % 2 == 0) r.softmax_path = "sm/" + r.sample_id + ".ften";
    m.records.push_back(r);
  }
  write_manifest(m, dir / "m.csv");
  const auto back = read_manifest(dir / "m.csv");
  CHECK(back.base_dir == dir.path());
  REQUIRE(back.records.size() == m.records.size());
  for (std::size_t i = 0; i < m.records.size(); ++i) {
    CHECK(back.records[i].sample_id == m.records[i].sample_id);
    CHECK(back.records[i].label == m.records[i].label);
    CHECK(back.records[i].tensor_paths == m.records[i].tensor_paths);
    CHECK(back.records[i].softmax_path == m.records[i].softmax_path);
  }
}

TEST_CASE("cross-check rejects a tensor whose channels do not match its layer") {
  testing::TempDir dir;
  write_tensor(FeatureTensor({2, 2, 64}, std::vector<float>(256, 1.0f)), dir / "wrong.ften");
  write_tensor(FeatureTensor({1, 1, 512}, std::vector<float>(512, 1.0f)), dir / "right.ften");
  {
    std::ofstream out(dir / "m.csv");
    out << kHeader << "ok,in,,,right.ften,,,\nbad,in,,,wrong.ften,,,\n";
  }
  const auto m = read_manifest(dir / "m.csv");
  try {
    validate_manifest_files(m);
    FAIL("expected ShapeError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ShapeError);
    CHECK(std::string(e.what()).find("bad") != std::string::npos);
  }

  {
    std::ofstream out(dir / "m2.csv");
    out << kHeader << "ok,in,,,right.ften,,,\n";
  }
  CHECK_NOTHROW(validate_manifest_files(read_manifest(dir / "m2.csv")));
}

TEST_CASE("cross-check requires rank-1 softmax files and existing paths") {
  testing::TempDir dir;
  write_tensor(FeatureTensor({1, 2}, {0.5f, 0.5f}), dir / "sm.ften");
  {
    std::ofstream out(dir / "m.csv");
    out << kHeader << "a,in,,,,,,sm.ften\n";
  }
  CHECK(code_of([&] { validate_manifest_files(read_manifest(dir / "m.csv")); }) ==
        ErrorCode::ShapeError);
  {
    std::ofstream out(dir / "m.csv");
    out << kHeader << "a,in,,,missing.ften,,,\n";
  }
  CHECK(code_of([&] { validate_manifest_files(read_manifest(dir / "m.csv")); }) ==
        ErrorCode::IoError);
}
