#include "maskedit/checkpoint.hpp"
#include "maskedit/core.hpp"
#include "maskedit/image_io.hpp"
#include "maskedit/rng.hpp"

#include <doctest.h>

#include "test_helpers.hpp"

#include <cstdio>
#include <filesystem>

using namespace maskedit;

TEST_CASE("block mean / nearest upsample round structure") {
    Rng rng(1);
    Mask m = test::random_mask(rng, 8, 8);
    Mask down = block_mean_down2(m);
    CHECK(down.rows() == 4);
    // block means match a naive loop
    Mask oracle = test::oracle_block_average(m, 2);
    CHECK(((down - oracle).abs().maxCoeff()) < 1e-15);
    // upsampling then downsampling is the identity on the coarse grid
    Mask up = upsample_nearest2(down);
    CHECK(((block_mean_down2(up) - down).abs().maxCoeff()) < 1e-15);
    CHECK_THROWS_AS(block_mean_down2(Mask::Zero(3, 4)), ShapeError);
}

TEST_CASE("area downscale matches brute-force block averaging") {
    Rng rng(2);
    Mask m = test::random_mask(rng, 32, 32);
    for (int f : {1, 2, 4, 8}) {
        Mask fast = downscale_area(m, f);
        Mask slow = test::oracle_block_average(m, f);
        CHECK(((fast - slow).abs().maxCoeff()) < 1e-14);
    }
    CHECK_THROWS_AS(downscale_area(m, 5), ShapeError);
}

TEST_CASE("adjoint identities: <Ax, y> == <x, A^T y>") {
    Rng rng(3);
    Mask x = test::random_mask(rng, 8, 8, -1.0, 1.0);
    Mask y = test::random_mask(rng, 16, 16, -1.0, 1.0);
    const double lhs = (upsample_nearest2(x) * y).sum();
    const double rhs = (x * block_sum_down2(y)).sum();
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));

    Mask y2 = test::random_mask(rng, 4, 4, -1.0, 1.0);
    const double lhs2 = (downscale_area(x, 2) * y2).sum();
    const double rhs2 = (x * upscale_area_adjoint(y2, 2)).sum();
    CHECK(lhs2 == doctest::Approx(rhs2).epsilon(1e-12));
}

TEST_CASE("rng is deterministic and bit-stable") {
    Rng a(42), b(42);
    for (int i = 0; i < 100; ++i) CHECK(a.normal() == b.normal());
    Rng c(42);
    double first = c.uniform();
    CHECK(first >= 0.0);
    CHECK(first < 1.0);
    CHECK(Rng::derive_seed(1, 0) != Rng::derive_seed(1, 1));
}

TEST_CASE("quantization is round-half-even") {
    // 0.5/255 sits exactly between 0 and 1 -> rounds to even (0)
    CHECK(io::quantize_u8(0.5 / 255.0) == 0);
    CHECK(io::quantize_u8(1.5 / 255.0) == 2);
    CHECK(io::quantize_u8(-0.3) == 0);
    CHECK(io::quantize_u8(1.7) == 255);
    CHECK(io::quantize_u8(1.0) == 255);
}

TEST_CASE("png round trip is bit-exact after quantization") {
    Rng rng(7);
    Image img = test::random_image(rng, 16, 24);
    const auto path = std::filesystem::temp_directory_path() / "maskedit_io_test.png";
    io::write_image(path.string(), img);
    Image back = io::read_image(path.string());
    const auto q0 = io::to_rgb8(img);
    const auto q1 = io::to_rgb8(back);
    CHECK(q0 == q1);
    std::filesystem::remove(path);

    CHECK_THROWS(io::read_image("/nonexistent/missing.png"));
}

TEST_CASE("mask export uses the linear 8-bit mapping") {
    Mask m(2, 2);
    m << 0.0, 1.0, 0.5, 0.25;
    const auto path = std::filesystem::temp_directory_path() / "maskedit_mask_test.png";
    io::write_mask(path.string(), m);
    Mask back = io::read_mask(path.string());
    CHECK(back(0, 0) == 0.0);
    CHECK(back(0, 1) == 1.0);
    CHECK(back(1, 0) == doctest::Approx(128.0 / 255.0));
    std::filesystem::remove(path);
}

TEST_CASE("array store round trip") {
    LatentCode w(4, 8);
    Rng rng(5);
    for (Eigen::Index i = 0; i < 4; ++i)
        for (Eigen::Index d = 0; d < 8; ++d) w.styles(i, d) = rng.normal();
    NoiseStack n;
    n.channels.push_back(test::random_mask(rng, 8, 8, -2.0, 2.0));
    n.channels.push_back(test::random_mask(rng, 16, 16, -2.0, 2.0));

    const auto path = std::filesystem::temp_directory_path() / "maskedit_ckpt_test.medt";
    checkpoint_from(w, n).save(path.string());
    ArrayStore store = ArrayStore::load(path.string());
    LatentCode w2;
    NoiseStack n2;
    checkpoint_to(store, &w2, &n2);
    CHECK(w2.styles == w.styles);
    REQUIRE(n2.channels.size() == 2);
    CHECK((n2.channels[0] == n.channels[0]).all());
    CHECK((n2.channels[1] == n.channels[1]).all());
    std::filesystem::remove(path);

    CHECK_THROWS(ArrayStore::load("/nonexistent/missing.medt"));
}
