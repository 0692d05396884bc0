#include <doctest.h>

#include <cmath>
#include <fstream>

#include "convrot/pipeline.hpp"
#include "convrot/tensorio.hpp"
#include "test_util.hpp"

using namespace convrot;
using namespace convrot::testutil;

TEST_CASE("group_rotate constant row examples") {
  MatrixD ones(1, 4, {1, 1, 1, 1});
  // Regular column sums are all +2; normalized by 1/2 the row is unchanged.
  CHECK(group_rotate(ones, {RotationKind::regular, 4}) == ones);
  // Sylvester concentrates the row into the first block coordinate.
  CHECK(group_rotate(ones, {RotationKind::sylvester, 4}) ==
        MatrixD(1, 4, {2, 0, 0, 0}));
}

TEST_CASE("kind none returns the input bit-identically") {
  MatrixD x = gaussian_matrix(3, 7, 5);
  CHECK(group_rotate(x, RotationSpec{}) == x);
}

TEST_CASE("normalized block rotations are orthonormal") {
  for (auto [kind, group] :
       {std::pair{RotationKind::sylvester, 8},
        std::pair{RotationKind::regular, 16},
        std::pair{RotationKind::random_orthogonal, 12}}) {
    const MatrixD& r = rotation_matrix({kind, group, 77}, group);
    for (int i = 0; i < group; ++i) {
      for (int j = 0; j < group; ++j) {
        double dot = 0.0;
        for (int k = 0; k < group; ++k) dot += r(k, i) * r(k, j);
        CHECK(std::abs(dot - (i == j ? 1.0 : 0.0)) <= 1e-12);
      }
    }
  }
}

TEST_CASE("rotated path preserves the product") {
  auto check_invariance = [](const RotationSpec& spec) {
    MatrixD x = gaussian_matrix(8, 16, 21);
    MatrixD w = gaussian_matrix(4, 16, 22);
    MatrixD plain = matmul_nt(x, w);
    MatrixD rotated = matmul_nt(group_rotate(x, spec), rotate_weights(w, spec));
    CHECK(rel_frobenius_error(rotated, plain) <= 1e-10);
  };
  check_invariance({RotationKind::regular, 4});
  check_invariance({RotationKind::sylvester, kGlobalGroup});
  check_invariance({RotationKind::random_orthogonal, 8, 1234});
}

TEST_CASE("group size must divide the width unless identity_tail is set") {
  MatrixD x = gaussian_matrix(2, 10, 3);
  CHECK_THROWS_AS(group_rotate(x, {RotationKind::regular, 4}), ShapeError);

  RotationSpec tail{RotationKind::regular, 4};
  tail.identity_tail = true;
  MatrixD out = group_rotate(x, tail);
  // final partial block passes through unrotated
  for (size_t j = 8; j < 10; ++j) {
    CHECK(out(0, j) == x(0, j));
    CHECK(out(1, j) == x(1, j));
  }
  // and the product is still preserved when both operands agree
  MatrixD w = gaussian_matrix(3, 10, 4);
  CHECK(rel_frobenius_error(matmul_nt(out, rotate_weights(w, tail)),
                            matmul_nt(x, w)) <= 1e-10);
}

TEST_CASE("rotation kind and order mismatches are rejected") {
  MatrixD x = gaussian_matrix(2, 16, 6);
  CHECK_THROWS_AS(group_rotate(x, {RotationKind::regular, 8}),
                  InvalidOrderError);
  MatrixD x12 = gaussian_matrix(2, 12, 6);
  CHECK_THROWS_AS(group_rotate(x12, {RotationKind::sylvester, kGlobalGroup}),
                  InvalidOrderError);
  CHECK_THROWS_AS(group_rotate(x12, {RotationKind::regular, kGlobalGroup}),
                  InvalidOrderError);
}

TEST_CASE("prepare_layer examples") {
  MatrixD w(4, 4);
  for (size_t i = 0; i < 4; ++i) w(i, i) = 7.0;
  PreparedLayer layer =
      prepare_layer(w, std::nullopt, RotationSpec{}, QuantSpec{4}, "diag");
  for (size_t i = 0; i < 4; ++i) {
    CHECK(layer.prepared_weights.scales[i] == 1.0);
    for (size_t j = 0; j < 4; ++j) {
      CHECK(layer.prepared_weights.codes(i, j) == (i == j ? 7 : 0));
    }
  }

  MatrixD zeros(3, 8);
  PreparedLayer zlayer =
      prepare_layer(zeros, std::nullopt, RotationSpec{}, QuantSpec{4}, "zero");
  for (size_t i = 0; i < 3; ++i) CHECK(zlayer.prepared_weights.scales[i] == 1.0);
  for (int8_t c : zlayer.prepared_weights.codes.values()) CHECK(c == 0);

  MatrixD seeded = gaussian_matrix(4, 16, 88);
  RotationSpec rot{RotationKind::regular, 4};
  CHECK(prepare_layer(seeded, std::vector<double>{1, 2, 3, 4}, rot, QuantSpec{4},
                      "a") ==
        prepare_layer(seeded, std::vector<double>{1, 2, 3, 4}, rot, QuantSpec{4},
                      "a"));
  CHECK_THROWS_AS(prepare_layer(seeded, std::vector<double>{1.0}, rot,
                                QuantSpec{4}, "bad"),
                  ShapeError);
}

TEST_CASE("int_gemm basics and exactness against a float oracle") {
  MatrixI8 a(1, 2, {1, 2});
  MatrixI8 b(1, 2, {3, 4});
  CHECK(int_gemm(a, b, 4, 4) == MatrixI32(1, 1, {11}));

  MatrixI8 a2(1, 2, {7, -7});
  MatrixI8 b2(1, 2, {7, 7});
  CHECK(int_gemm(a2, b2, 4, 4) == MatrixI32(1, 1, {0}));

  Rng rng(404);
  MatrixI8 ra(32, 32);
  MatrixI8 rb(32, 32);
  for (size_t i = 0; i < 32; ++i) {
    for (size_t j = 0; j < 32; ++j) {
      ra(i, j) = static_cast<int8_t>(static_cast<int64_t>(rng.next_below(15)) - 7);
      rb(i, j) = static_cast<int8_t>(static_cast<int64_t>(rng.next_below(15)) - 7);
    }
  }
  MatrixI32 got = int_gemm(ra, rb, 4, 4);
  for (size_t m = 0; m < 32; ++m) {
    for (size_t n = 0; n < 32; ++n) {
      double acc = 0.0;
      for (size_t k = 0; k < 32; ++k) {
        acc += static_cast<double>(ra(m, k)) * rb(n, k);
      }
      CHECK(static_cast<double>(got(m, n)) == acc);
    }
  }
}

TEST_CASE("int_gemm rejects overflow-capable depths before computing") {
  MatrixI8 a(1, 200000);
  MatrixI8 b(1, 200000);
  CHECK_THROWS_AS(int_gemm(a, b, 8, 8), CapacityError);
  CHECK_NOTHROW(int_gemm(a, b, 4, 4));  // 49 * 200000 fits easily

  MatrixI8 c(1, 3);
  CHECK_THROWS_AS(int_gemm(a, c, 4, 4), ShapeError);
}

TEST_CASE("forward exact 1x1 case") {
  MatrixD x(1, 1, {7.0});
  MatrixD w(1, 1, {7.0});
  PreparedLayer layer =
      prepare_layer(w, std::nullopt, RotationSpec{}, QuantSpec{4}, "one");
  LayerOutput out = forward(x, layer, QuantSpec{4});
  CHECK(out.values == MatrixD(1, 1, {49.0}));
  CHECK(out.accumulators_checked);
}

TEST_CASE("forward on zero activations returns the bias") {
  MatrixD x(2, 4);
  MatrixD w = gaussian_matrix(3, 4, 9);
  std::vector<double> bias{0.5, -1.5, 2.0};
  PreparedLayer layer =
      prepare_layer(w, bias, RotationSpec{}, QuantSpec{4}, "biased");
  LayerOutput out = forward(x, layer, QuantSpec{4});
  for (size_t m = 0; m < 2; ++m) {
    for (size_t n = 0; n < 3; ++n) CHECK(out.values(m, n) == bias[n]);
  }

  PreparedLayer nobias =
      prepare_layer(w, std::nullopt, RotationSpec{}, QuantSpec{4}, "plain");
  for (double v : forward(x, nobias, QuantSpec{4}).values.values()) {
    CHECK(v == 0.0);
  }
}

TEST_CASE("forward error on the pinned seeded layer") {
  MatrixD x = gaussian_matrix(16, 64, 15);
  MatrixD w = gaussian_matrix(8, 64, 515);
  PreparedLayer layer = prepare_layer(w, std::nullopt,
                                      {RotationKind::regular, 16}, QuantSpec{4},
                                      "seeded");
  LayerOutput quant = forward(x, layer, QuantSpec{4});
  LayerOutput ref = reference_forward(x, w, std::nullopt);
  double err = rel_frobenius_error(quant.values, ref.values);
  CHECK(err == doctest::Approx(0.12035518741210707).epsilon(0.10));
  CHECK(err < 0.15);
}

TEST_CASE("forward shape and bit validation") {
  MatrixD x(1, 3);
  MatrixD w(2, 4);
  PreparedLayer layer =
      prepare_layer(w, std::nullopt, RotationSpec{}, QuantSpec{4}, "w");
  CHECK_THROWS_AS(forward(x, layer, QuantSpec{4}), ShapeError);
  MatrixD ok(1, 4);
  CHECK_THROWS_AS(forward(ok, layer, QuantSpec{5}), InvalidValueError);
}

TEST_CASE("reference_forward basics") {
  MatrixD x = gaussian_matrix(3, 4, 77);
  MatrixD eye(4, 4);
  for (size_t i = 0; i < 4; ++i) eye(i, i) = 1.0;
  CHECK(reference_forward(x, eye, std::nullopt).values == x);

  CHECK(reference_forward(MatrixD(1, 1, {2.0}), MatrixD(1, 1, {3.0}),
                          std::nullopt)
            .values == MatrixD(1, 1, {6.0}));

  CHECK_THROWS_AS(reference_forward(MatrixD(1, 2), MatrixD(1, 3), std::nullopt),
                  ShapeError);
}

TEST_CASE("forward equals reference exactly on representable integer grids") {
  // Every row holds a +/-7 entry so the max-abs scale is exactly 1.
  MatrixD x(2, 4, {7, -3, 0, 2, 1, -7, 5, 4});
  MatrixD w(3, 4, {7, 1, -1, 0, -2, 7, 3, 1, 0, -5, 7, -6});
  PreparedLayer layer =
      prepare_layer(w, std::nullopt, RotationSpec{}, QuantSpec{4}, "grid");
  CHECK(forward(x, layer, QuantSpec{4}).values ==
        reference_forward(x, w, std::nullopt).values);
}

TEST_CASE("constant-row law: regular preserves, sylvester concentrates") {
  const double c = 3.7;
  for (int group : {4, 16, 64}) {
    MatrixD row(1, static_cast<size_t>(group));
    for (int j = 0; j < group; ++j) row(0, j) = c;

    MatrixD reg = group_rotate(row, {RotationKind::regular, group});
    double reg_max = 0.0;
    for (double v : reg.values()) reg_max = std::max(reg_max, std::abs(v));
    CHECK(reg_max == doctest::Approx(c).epsilon(1e-9));

    MatrixD syl = group_rotate(row, {RotationKind::sylvester, group});
    double syl_max = 0.0;
    for (double v : syl.values()) syl_max = std::max(syl_max, std::abs(v));
    CHECK(syl_max ==
          doctest::Approx(c * std::sqrt(static_cast<double>(group)))
              .epsilon(1e-9));
  }
}

TEST_CASE("8-bit activations never increase the max-abs error") {
  for (uint64_t seed = 1; seed <= 5; ++seed) {
    MatrixD x = gaussian_matrix(8, 32, seed);
    MatrixD w = gaussian_matrix(6, 32, seed + 100);
    LayerOutput ref = reference_forward(x, w, std::nullopt);
    RotationSpec rot{RotationKind::regular, 16};
    double err4 = 0.0;
    double err8 = 0.0;
    {
      PreparedLayer l4 = prepare_layer(w, std::nullopt, rot, QuantSpec{4}, "4");
      LayerOutput o = forward(x, l4, QuantSpec{4});
      for (size_t i = 0; i < o.values.size(); ++i) {
        err4 = std::max(err4,
                        std::abs(o.values.data()[i] - ref.values.data()[i]));
      }
    }
    {
      PreparedLayer l8 = prepare_layer(w, std::nullopt, rot, QuantSpec{8}, "8");
      LayerOutput o = forward(x, l8, QuantSpec{8});
      for (size_t i = 0; i < o.values.size(); ++i) {
        err8 = std::max(err8,
                        std::abs(o.values.data()[i] - ref.values.data()[i]));
      }
    }
    CHECK(err8 <= err4);
  }
}

TEST_CASE("rotation cost is linear in width for a fixed group") {
  RotationStats stats;
  for (size_t cols : {8, 16, 32}) {
    MatrixD x = gaussian_matrix(4, cols, 50);
    group_rotate(x, {RotationKind::regular, 4}, &stats);
    CHECK(stats.multiply_adds == 4 * cols * 4);

    group_rotate(x, {RotationKind::sylvester, kGlobalGroup}, &stats);
    CHECK(stats.multiply_adds == 4 * cols * cols);
  }
  MatrixD x = gaussian_matrix(2, 4, 51);
  group_rotate(x, RotationSpec{}, &stats);
  CHECK(stats.multiply_adds == 0);
}

TEST_CASE("prepared layer directory round trip") {
  TempDir dir("layer");
  MatrixD w = gaussian_matrix(6, 32, 777);
  std::vector<double> bias{1, -2, 3, -4, 5, -6};
  for (int bits : {4, 8}) {
    PreparedLayer layer = prepare_layer(
        w, bias, {RotationKind::regular, 16}, QuantSpec{bits}, "roundtrip");
    auto subdir = dir.file("b" + std::to_string(bits));
    save_prepared_layer(subdir, layer);
    PreparedLayer loaded = load_prepared_layer(subdir);

    CHECK(loaded.name == layer.name);
    CHECK(loaded.out_features == layer.out_features);
    CHECK(loaded.in_features == layer.in_features);
    CHECK(loaded.rotation == layer.rotation);
    CHECK(loaded.weight_quant.bits == bits);
    CHECK(loaded.prepared_weights.codes == layer.prepared_weights.codes);
    CHECK(loaded.bias == bias);
    // scales pass through an f32 file
    for (size_t i = 0; i < bias.size(); ++i) {
      CHECK(loaded.prepared_weights.scales[i] ==
            doctest::Approx(layer.prepared_weights.scales[i]).epsilon(1e-6));
    }

    // a second save of the loaded layer is byte-identical
    auto subdir2 = dir.file("b" + std::to_string(bits) + "-again");
    save_prepared_layer(subdir2, loaded);
    for (const char* name : {"weights.crt", "weights.scales.crt", "bias.crt",
                             "manifest.json"}) {
      std::ifstream f1(subdir + "/" + name, std::ios::binary);
      std::ifstream f2(subdir2 + "/" + name, std::ios::binary);
      std::string b1((std::istreambuf_iterator<char>(f1)),
                     std::istreambuf_iterator<char>());
      std::string b2((std::istreambuf_iterator<char>(f2)),
                     std::istreambuf_iterator<char>());
      CHECK(b1 == b2);
    }
  }
}
