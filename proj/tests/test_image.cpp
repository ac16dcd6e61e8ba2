#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "endodepth/errors.hpp"
#include "endodepth/image.hpp"

using namespace endo;

TEST_CASE("tone map fundamentals", "[image]") {
    REQUIRE(tone_map(0.0) == 0.0);
    REQUIRE(tone_map(-3.0) == 0.0);  // negative radiance clamps to black
    double prev = -1.0;
    for (double x = 0.0; x <= 50.0; x += 0.5) {
        double y = tone_map(x);
        REQUIRE(y >= prev);
        REQUIRE(y >= 0.0);
        REQUIRE(y < 1.0);
        prev = y;
    }
    // Exposure doubles the linear input.
    REQUIRE(tone_map(1.0, 2.0) == Catch::Approx(tone_map(2.0, 1.0)));
    // Vector version is the scalar applied per channel.
    Vec3 v = tone_map(Vec3{0.2, 1.0, 5.0}, 1.3);
    REQUIRE(v.x == Catch::Approx(tone_map(0.2, 1.3)));
    REQUIRE(v.y == Catch::Approx(tone_map(1.0, 1.3)));
    REQUIRE(v.z == Catch::Approx(tone_map(5.0, 1.3)));
}

TEST_CASE("tone map inverse recovers linear radiance", "[image]") {
    for (double x : {0.01, 0.1, 0.5, 1.0, 3.0, 20.0}) {
        for (double e : {0.5, 1.0, 2.0}) {
            double enc = tone_map(x, e);
            REQUIRE(tone_map_inverse(enc, e) == Catch::Approx(x).epsilon(1e-10));
        }
    }
}

TEST_CASE("pixel intensity is the channel mean", "[image]") {
    ImageRGB img(2, 1);
    img.set_pixel(0, 0, {0.3, 0.6, 0.9});
    REQUIRE(pixel_intensity(img, 0, 0) ==
            Catch::Approx((img.at(0, 0, 0) + img.at(0, 0, 1) + img.at(0, 0, 2)) / 3.0));
    img.set_pixel(1, 0, {0.5, 0.5, 0.5});
    REQUIRE(pixel_intensity(img, 1, 0) == Catch::Approx(0.5).margin(1e-7));
}

TEST_CASE("bilinear sampling interpolates and replicates edges", "[image]") {
    ImageRGB img(3, 2);
    // Dyadic values are exact in f32.
    img.set_pixel(0, 0, {0.0, 0.0, 0.0});
    img.set_pixel(1, 0, {0.5, 0.25, 1.0});
    img.set_pixel(2, 0, {1.0, 0.5, 0.0});
    img.set_pixel(0, 1, {0.25, 0.75, 0.5});
    img.set_pixel(1, 1, {0.75, 0.125, 0.25});
    img.set_pixel(2, 1, {0.5, 1.0, 0.125});

    // Integer coordinates return the pixel exactly.
    for (int y = 0; y < 2; ++y)
        for (int x = 0; x < 3; ++x) {
            Vec3 s = sample_bilinear(img, x, y);
            Vec3 p = img.pixel(x, y);
            REQUIRE(s.x == p.x);
            REQUIRE(s.y == p.y);
            REQUIRE(s.z == p.z);
        }

    // Midpoint between two horizontal neighbors averages them.
    Vec3 m = sample_bilinear(img, 0.5, 0.0);
    REQUIRE(m.x == Catch::Approx(0.25));
    REQUIRE(m.y == Catch::Approx(0.125));
    REQUIRE(m.z == Catch::Approx(0.5));

    // Beyond the border the edge pixel replicates.
    Vec3 out = sample_bilinear(img, -5.0, 0.0);
    REQUIRE(out.x == img.at(0, 0, 0));
    Vec3 out2 = sample_bilinear(img, 10.0, 10.0);
    REQUIRE(out2.y == img.at(2, 1, 1));
}

TEST_CASE("depth map sentinel semantics", "[image]") {
    DepthMap d(4, 3, 99.0f);
    REQUIRE(d.width == 4);
    for (int y = 0; y < 3; ++y)
        for (int x = 0; x < 4; ++x) REQUIRE_FALSE(d.is_valid(x, y));
    d.at(2, 1) = 7.5f;
    REQUIRE(d.is_valid(2, 1));
    REQUIRE(d.at(2, 1) == 7.5f);
}

TEST_CASE("image construction validates dimensions", "[image]") {
    REQUIRE_THROWS_AS(ImageRGB(0, 4), ParameterError);
    REQUIRE_THROWS_AS(ImageRGB(4, -1), ParameterError);
    REQUIRE_THROWS_AS(DepthMap(0, 4, 0.0f), ParameterError);
}
