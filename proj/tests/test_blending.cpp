#include "maskedit/blending.hpp"

#include <doctest.h>

#include "test_helpers.hpp"

using namespace maskedit;

TEST_CASE("blend degenerate masks are exact") {
    Rng rng(61);
    Image gen = test::random_image(rng, 8, 8);
    Image in = test::random_image(rng, 8, 8);
    Image all_gen = blend(gen, in, Mask::Constant(8, 8, 1.0));
    Image all_in = blend(gen, in, Mask::Zero(8, 8));
    for (int c = 0; c < 3; ++c) {
        CHECK((all_gen.ch[c] == gen.ch[c]).all());  // bit-identical
        CHECK((all_in.ch[c] == in.ch[c]).all());
    }
    Image mid = blend(Image::constant(2, 2, 1.0), Image::constant(2, 2, 0.0),
                      Mask::Constant(2, 2, 0.5));
    CHECK(mid.ch[0](0, 0) == 0.5);
}

TEST_CASE("blend is linear in the mask and convex per pixel") {
    Rng rng(62);
    for (int trial = 0; trial < 50; ++trial) {
        Image gen = test::random_image(rng, 6, 6);
        Image in = test::random_image(rng, 6, 6);
        Mask b1 = test::random_mask(rng, 6, 6);
        Mask b2 = test::random_mask(rng, 6, 6);
        Image mixed = blend(gen, in, ((b1 + b2) / 2.0).eval());
        Image apart1 = blend(gen, in, b1);
        Image apart2 = blend(gen, in, b2);
        for (int c = 0; c < 3; ++c) {
            CHECK(((mixed.ch[c] - (apart1.ch[c] + apart2.ch[c]) / 2.0).abs().maxCoeff()) < 1e-12);
            // convexity: outputs stay inside the per-pixel envelope
            Mask lo = gen.ch[c].min(in.ch[c]);
            Mask hi = gen.ch[c].max(in.ch[c]);
            CHECK((apart1.ch[c] >= lo - 1e-15).all());
            CHECK((apart1.ch[c] <= hi + 1e-15).all());
        }
    }
}

TEST_CASE("blend variants") {
    Rng rng(63);
    Image gen = test::random_image(rng, 8, 8);
    Image in = test::random_image(rng, 8, 8);

    SUBCASE("equal masks produce identical outputs") {
        RegionMaskSet masks;
        masks.skin = Mask::Zero(8, 8);
        masks.target = Mask::Constant(8, 8, 0.4);
        masks.target_generated = masks.target;
        masks.blend = masks.target;
        auto variants = blend_variants(gen, in, masks);
        REQUIRE(variants.size() == 3);
        for (int c = 0; c < 3; ++c) {
            CHECK((variants.at("standard").ch[c] == variants.at("target_input").ch[c]).all());
            CHECK((variants.at("standard").ch[c] == variants.at("target_generated").ch[c]).all());
        }
    }
    SUBCASE("zero input-target variant returns the input unchanged") {
        RegionMaskSet masks;
        masks.skin = Mask::Constant(8, 8, 1.0);
        masks.target = Mask::Zero(8, 8);
        masks.target_generated = Mask::Constant(8, 8, 0.5);
        masks.blend = blend_mask(masks.skin, masks.target, masks.target_generated, BlendMode::standard);
        auto variants = blend_variants(gen, in, masks);
        for (int c = 0; c < 3; ++c) CHECK((variants.at("target_input").ch[c] == in.ch[c]).all());
    }
    SUBCASE("binary disjoint masks differ exactly on the symmetric difference") {
        RegionMaskSet masks;
        masks.skin = Mask::Zero(8, 8);
        masks.target = Mask::Zero(8, 8);
        masks.target_generated = Mask::Zero(8, 8);
        masks.target(1, 1) = 1.0;      // only in the input target
        masks.target_generated(5, 5) = 1.0;  // only in the generated target
        masks.blend = masks.target;
        auto variants = blend_variants(gen, in, masks);
        const Image& v1 = variants.at("target_input");
        const Image& v2 = variants.at("target_generated");
        // pixel-set comparison: differences exactly at (1,1) and (5,5)
        for (int c = 0; c < 3; ++c)
            for (Eigen::Index y = 0; y < 8; ++y)
                for (Eigen::Index x = 0; x < 8; ++x) {
                    const bool in_sym_diff = (y == 1 && x == 1) || (y == 5 && x == 5);
                    const bool differs =
                        v1.ch[c](y, x) != v2.ch[c](y, x) && gen.ch[c](y, x) != in.ch[c](y, x);
                    if (in_sym_diff)
                        CHECK(v1.ch[c](y, x) != doctest::Approx(v2.ch[c](y, x)).epsilon(1e-15));
                    else
                        CHECK(!differs);
                }
    }
}
