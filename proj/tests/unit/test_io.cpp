#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <limits>

#include "brainalign/datamodel.hpp"
#include "brainalign/digest.hpp"
#include "brainalign/errors.hpp"
#include "brainalign/io.hpp"
#include "brainalign/npy.hpp"
#include "brainalign/parallel.hpp"
#include "brainalign/random.hpp"
#include "json.hpp"
#include "temp_dir.hpp"

using namespace brainalign;

namespace {

// Hand-assembled NPY v1.0 file.
std::string make_npy(const std::string& dict, const std::string& payload) {
  std::string header = dict;
  const std::size_t unpadded = 10 + header.size() + 1;
  header.append((64 - unpadded % 64) % 64, ' ');
  header.push_back('\n');
  std::string out = "\x93NUMPY";
  out.push_back('\x01');
  out.push_back('\x00');
  out.push_back(static_cast<char>(header.size() & 0xff));
  out.push_back(static_cast<char>(header.size() >> 8));
  return out + header + payload;
}

std::string doubles(std::initializer_list<double> values) {
  std::string s;
  for (const double v : values) s.append(reinterpret_cast<const char*>(&v), sizeof v);
  return s;
}

bool bit_equal(const Matrix& a, const Matrix& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() &&
         std::memcmp(a.data(), b.data(), sizeof(double) * static_cast<std::size_t>(a.size())) == 0;
}

}  // namespace

TEST(Npy, ZerosDecode) {
  const auto m = npy::decode(make_npy("{'descr': '<f8', 'fortran_order': False, 'shape': (2, 3), }",
                                      doubles({0, 0, 0, 0, 0, 0})));
  EXPECT_EQ(m.rows(), 2);
  EXPECT_EQ(m.cols(), 3);
  EXPECT_TRUE(m.isZero(0.0));
}

TEST(Npy, RowMajorPayload) {
  const auto m = npy::decode(make_npy("{'descr': '<f8', 'fortran_order': False, 'shape': (2, 2), }",
                                      doubles({1, 2, 3, 4})));
  EXPECT_EQ(m(0, 1), 2.0);
  EXPECT_EQ(m(1, 0), 3.0);
}

TEST(Npy, FloatWidened) {
  std::string payload;
  for (const float v : {1.5f, -0.25f}) payload.append(reinterpret_cast<const char*>(&v), sizeof v);
  const auto m = npy::decode(make_npy("{'descr': '<f4', 'fortran_order': False, 'shape': (1, 2), }", payload));
  EXPECT_EQ(m(0, 0), 1.5);
  EXPECT_EQ(m(0, 1), -0.25);
}

TEST(Npy, RoundTripExample) {
  Matrix m(1, 2);
  m << 1.5, -2.0;
  TempDir dir;
  npy::write_matrix(dir / "m.npy", m);
  EXPECT_TRUE(bit_equal(npy::read_matrix(dir / "m.npy"), m));
}

TEST(Npy, HeaderIsAlignedTo64Bytes) {
  const auto bytes = npy::encode(Matrix::Ones(3, 5));
  const std::size_t header_len = static_cast<unsigned char>(bytes[8]) | static_cast<unsigned char>(bytes[9]) << 8;
  EXPECT_EQ((10 + header_len) % 64, 0u);
  EXPECT_EQ(bytes.size(), 10 + header_len + 15 * sizeof(double));
}

TEST(Npy, RoundTripRandomShapes) {
  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const auto rows = static_cast<Index>(1 + rng.below(64));
    const auto cols = static_cast<Index>(1 + rng.below(64));
    Matrix m(rows, cols);
    for (Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal() * std::pow(10.0, rng.normal() * 5);
    if (trial % 7 == 0) m(0, 0) = std::numeric_limits<double>::quiet_NaN();
    const auto back = npy::decode(npy::encode(m));
    ASSERT_TRUE(bit_equal(back, m)) << rows << "x" << cols;
  }
}

TEST(Npy, TruncatedPayloadIsShapeError) {
  EXPECT_THROW(npy::decode(make_npy("{'descr': '<f8', 'fortran_order': False, 'shape': (2, 3), }",
                                    doubles({1, 2, 3, 4, 5}))),
               ShapeError);
}

TEST(Npy, Rejections) {
  EXPECT_THROW(npy::decode("not an npy file at all"), FormatError);
  EXPECT_THROW(npy::decode(make_npy("{'descr': '<i8', 'fortran_order': False, 'shape': (1, 1), }", doubles({1}))),
               DtypeError);
  EXPECT_THROW(npy::decode(make_npy("{'descr': '>f8', 'fortran_order': False, 'shape': (1, 1), }", doubles({1}))),
               DtypeError);
  EXPECT_THROW(npy::decode(make_npy("{'descr': '<f8', 'fortran_order': True, 'shape': (1, 1), }", doubles({1}))),
               FormatError);
  EXPECT_THROW(npy::decode(make_npy("{'descr': '<f8', 'fortran_order': False, 'shape': (1, 1, 1), }", doubles({1}))),
               ShapeError);
  EXPECT_THROW(npy::decode(make_npy("{'descr': '<f8', 'fortran_order': False, 'shape': (2,), }", doubles({1, 2}))),
               ShapeError);
}

TEST(Npy, MissingFile) {
  TempDir dir;
  EXPECT_THROW(npy::read_matrix(dir / "absent.npy"), MissingInputError);
}

TEST(Digest, KnownVector) {
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  TempDir dir;
  write_file_atomic(dir / "f.txt", "abc");
  EXPECT_EQ(sha256_file(dir / "f.txt"), sha256_hex("abc"));
}

TEST(Random, DeterministicStreams) {
  Rng a(5), b(5), c(6);
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next();
    EXPECT_EQ(x, b.next());
    (void)c;
  }
  Rng d(5);
  Rng e(6);
  EXPECT_NE(d.next(), e.next());
  EXPECT_NE(mix_seed(1, 2), mix_seed(1, 3));
  EXPECT_NE(mix_seed(1, 2), mix_seed(2, 2));
}

TEST(Random, BelowIsUniformInRange) {
  Rng rng(3);
  std::vector<int> counts(7, 0);
  for (int i = 0; i < 70000; ++i) {
    const auto v = rng.below(7);
    ASSERT_LT(v, 7u);
    ++counts[v];
  }
  for (const int c : counts) EXPECT_NEAR(c, 10000, 500);
}

TEST(Random, NormalMoments) {
  Rng rng(9);
  double s = 0, ss = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double v = rng.normal();
    s += v;
    ss += v * v;
  }
  EXPECT_NEAR(s / n, 0.0, 0.01);
  EXPECT_NEAR(ss / n, 1.0, 0.02);
}

TEST(Parallel, MatchesSerialAndRethrowsLowestIndex) {
  std::vector<double> serial(100), threaded(100);
  auto fn = [](std::size_t i) { return std::sin(static_cast<double>(i)); };
  parallel_for(serial.size(), 1, [&](std::size_t i) { serial[i] = fn(i); });
  parallel_for(threaded.size(), 4, [&](std::size_t i) { threaded[i] = fn(i); });
  EXPECT_EQ(serial, threaded);
  try {
    parallel_for(50, 4, [](std::size_t i) {
      if (i == 17 || i == 33) throw ValidationError(std::to_string(i));
    });
    FAIL() << "expected an exception";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("17"), std::string::npos);
  }
}

// ---------------------------------------------------------------------------

namespace {

StimulusSet small_stimuli() {
  StimulusSet s;
  for (int i = 0; i < 4; ++i)
    s.stimuli.push_back({"s" + std::to_string(i), "sentence " + std::to_string(i), i < 2 ? "a" : "b", i % 2});
  return s;
}

NeuralDataset small_neural(const StimulusSet& s) {
  NeuralDataset n;
  n.benchmark_id = "bench";
  n.stimulus_ids = s.ids();
  n.groups = s.groups();
  Rng rng(1);
  for (const char* id : {"A", "B"}) {
    SubjectResponses subj;
    subj.subject_id = id;
    subj.matrix = Matrix(4, 3);
    for (Index i = 0; i < subj.matrix.size(); ++i) subj.matrix.data()[i] = rng.normal();
    n.subjects.push_back(subj);
  }
  return n;
}

}  // namespace

TEST(Datamodel, StimulusSetValidation) {
  auto s = small_stimuli();
  EXPECT_NO_THROW(s.validate());
  s.stimuli[1].stimulus_id = "s0";
  EXPECT_THROW(s.validate(), ValidationError);
  s = small_stimuli();
  s.stimuli[2].group.clear();
  EXPECT_THROW(s.validate(), ValidationError);
}

TEST(Datamodel, ActivationSetValidation) {
  ActivationSet a;
  a.stimulus_ids = {"x", "y"};
  a.matrix = Matrix::Ones(2, 3);
  EXPECT_NO_THROW(a.validate());
  a.matrix(1, 1) = std::numeric_limits<double>::infinity();
  EXPECT_THROW(a.validate(), ValidationError);
  a.matrix = Matrix::Ones(3, 3);
  EXPECT_THROW(a.validate(), ShapeError);
}

TEST(Datamodel, FoldSpecJsonRoundTrip) {
  FoldSpec f;
  f.scheme = FoldScheme::grouped;
  f.k = 2;
  f.seed = 42;
  f.elements = {"a", "b", "c"};
  f.fold_of = {0, 1, 0};
  f.validate();
  EXPECT_EQ(FoldSpec::from_json(f.to_json()), f);
  EXPECT_EQ(f.test_indices(0), (std::vector<std::size_t>{0, 2}));
  EXPECT_EQ(f.train_indices(0), (std::vector<std::size_t>{1}));
  f.fold_of = {0, 0, 0};
  EXPECT_THROW(f.validate(), ValidationError);
}

TEST(Datamodel, ScoreFromFoldsIsExactMean) {
  const auto s = AlignmentScore::from_folds("b", "m", 10, {0.2, 0.4, 0.3}, 0.5);
  EXPECT_EQ(s.raw_r, (0.2 + 0.4 + 0.3) / 3.0);
  EXPECT_EQ(s.normalized, s.raw_r / 0.5);
  EXPECT_EQ(s.n_folds, 3);
  EXPECT_THROW(AlignmentScore::from_folds("b", "m", 10, {}, 0.5), ScoreUndefined);
}

TEST(Datamodel, TrajectoryTableOrdering) {
  TrajectoryTable t;
  t.add(10, "x", 1.0);
  t.add(20, "x", 2.0);
  t.add(10, "y", 3.0);
  EXPECT_THROW(t.add(15, "x", 0.0), ValidationError);
  EXPECT_THROW(t.add(20, "x", 0.0), ValidationError);
  EXPECT_EQ(t.series("x").size(), 2u);
  const auto joined = align_series(t.series("x"), t.series("y"));
  ASSERT_EQ(joined.size(), 1u);
  EXPECT_EQ(joined[0].first.checkpoint_tokens, 10u);
  EXPECT_EQ(joined[0].second.value, 3.0);
}

TEST(Io, BenchmarkRoundTrip) {
  TempDir dir;
  const auto stimuli = small_stimuli();
  const auto neural = small_neural(stimuli);
  write_benchmark(dir.path(), stimuli, neural);
  const auto b = load_benchmark(dir.path());
  EXPECT_EQ(b.benchmark_id, "bench");
  EXPECT_EQ(b.stimuli, stimuli);
  ASSERT_EQ(b.neural.subjects.size(), 2u);
  EXPECT_EQ(b.neural.subjects[0], neural.subjects[0]);
  EXPECT_EQ(b.neural.subjects[1], neural.subjects[1]);
}

TEST(Io, AllNanUnitDropped) {
  TempDir dir;
  const auto stimuli = small_stimuli();
  auto neural = small_neural(stimuli);
  neural.subjects[0].matrix.col(1).setConstant(std::numeric_limits<double>::quiet_NaN());
  write_benchmark(dir.path(), stimuli, neural);
  const auto b = load_benchmark(dir.path());
  EXPECT_EQ(b.neural.subjects[0].dropped_units, 1u);
  EXPECT_EQ(b.neural.subjects[0].matrix.cols(), 2);
  EXPECT_EQ(b.neural.subjects[1].dropped_units, 0u);
}

TEST(Io, PartialNanRejected) {
  TempDir dir;
  const auto stimuli = small_stimuli();
  auto neural = small_neural(stimuli);
  neural.subjects[1].matrix(2, 0) = std::numeric_limits<double>::quiet_NaN();
  write_benchmark(dir.path(), stimuli, neural);
  EXPECT_THROW(load_benchmark(dir.path()), ValidationError);
}

TEST(Io, ManifestProblems) {
  TempDir dir;
  EXPECT_THROW(load_benchmark(dir.path()), FormatError);

  const auto stimuli = small_stimuli();
  write_benchmark(dir.path(), stimuli, small_neural(stimuli));
  auto manifest = nlohmann::json::parse(read_file(dir / "manifest.json"));
  manifest["unknown_extension"] = 1;
  write_file_atomic(dir / "manifest.json", manifest.dump());
  EXPECT_NO_THROW(load_benchmark(dir.path()));

  auto dup = manifest;
  dup["stimuli"][1]["stimulus_id"] = dup["stimuli"][0]["stimulus_id"];
  write_file_atomic(dir / "manifest.json", dup.dump());
  EXPECT_THROW(load_benchmark(dir.path()), ValidationError);

  auto version = manifest;
  version["schema_version"] = 2;
  write_file_atomic(dir / "manifest.json", version.dump());
  EXPECT_THROW(load_benchmark(dir.path()), FormatError);

  auto short_list = manifest;
  short_list["stimuli"].erase(3);
  write_file_atomic(dir / "manifest.json", short_list.dump());
  EXPECT_THROW(load_benchmark(dir.path()), ShapeError);
}

TEST(Io, ActivationRoundTrip) {
  TempDir dir;
  ActivationSet a;
  a.model_id = "m";
  a.checkpoint_tokens = 123456789012ull;
  a.layer_tag = "block3";
  a.seed = 4;
  a.stimulus_ids = {"x", "y", "z"};
  a.matrix = Matrix::Random(3, 5);
  const auto sidecar = write_activations(dir.path(), "block3", a);
  const auto back = read_activations(sidecar);
  EXPECT_EQ(back.model_id, a.model_id);
  EXPECT_EQ(back.checkpoint_tokens, a.checkpoint_tokens);
  EXPECT_EQ(back.layer_tag, a.layer_tag);
  EXPECT_EQ(back.seed, a.seed);
  EXPECT_EQ(back.stimulus_ids, a.stimulus_ids);
  EXPECT_TRUE(bit_equal(back.matrix, a.matrix));
}

TEST(Io, ReadMissingFile) {
  TempDir dir;
  EXPECT_THROW(read_file(dir / "nope"), MissingInputError);
}
