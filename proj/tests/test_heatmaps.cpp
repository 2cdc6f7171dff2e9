// SPDX-License-Identifier: Apache-2.0
#include "doctest.h"

#include "mvlift/heatmaps.hpp"

using namespace mvlift;

TEST_CASE("argmax extraction") {
    Heatmap h;
    h.grid = Eigen::MatrixXd::Zero(16, 16);
    h.grid(7, 3) = 0.9;  // (x=3, y=7)
    const Eigen::Vector2i at = extract_joint(h);
    CHECK(at.x() == 3);
    CHECK(at.y() == 7);

    // Uniform grid resolves to the first cell in row-major scan order.
    h.grid.setConstant(0.25);
    CHECK(extract_joint(h) == Eigen::Vector2i(0, 0));

    h.grid.resize(0, 0);
    CHECK_THROWS_AS(extract_joint(h), InvalidArgument);
}

TEST_CASE("gaussian rendering") {
    const Heatmap h = render_joint({10.0, 20.0}, 40, 30, 2.0);
    CHECK(extract_joint(h) == Eigen::Vector2i(10, 20));
    CHECK(h.grid(20, 10) == doctest::Approx(1.0).epsilon(1e-12));
    // One sigma away along x.
    CHECK(h.grid(20, 12) == doctest::Approx(std::exp(-0.5)).epsilon(1e-6));
    // Beyond the 3-sigma cutoff the map is exactly zero.
    CHECK(h.grid(20, 17) == 0.0);
    CHECK(h.grid(0, 0) == 0.0);

    CHECK_THROWS_AS(render_joint({-1.0, 5.0}, 40, 30, 2.0), OutOfBounds);
    CHECK_THROWS_AS(render_joint({5.0, 40.0}, 40, 30, 2.0), OutOfBounds);
}

TEST_CASE("render/extract round trip") {
    // Integer points come back exactly.
    for (int x : {0, 3, 29}) {
        for (int y : {0, 17, 39}) {
            const Eigen::Vector2i at =
                extract_joint(render_joint({double(x), double(y)}, 40, 30, 1.0));
            CHECK(at == Eigen::Vector2i(x, y));
        }
    }
    // Sub-pixel points round to nearest, half-up.
    CHECK(extract_joint(render_joint({10.4, 20.0}, 40, 30, 1.0)) ==
          Eigen::Vector2i(10, 20));
    CHECK(extract_joint(render_joint({10.6, 20.0}, 40, 30, 1.0)) ==
          Eigen::Vector2i(11, 20));
    CHECK(extract_joint(render_joint({10.5, 20.5}, 40, 30, 1.0)) ==
          Eigen::Vector2i(11, 21));
}

TEST_CASE("tiny sigma still renders a dominant peak") {
    const Heatmap h = render_joint({5.0, 5.0}, 11, 11, 1e-6);
    CHECK(h.grid(5, 5) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(extract_joint(h) == Eigen::Vector2i(5, 5));
    // The clamp keeps neighbours strictly below the peak.
    CHECK(h.grid(5, 6) < 1.0);
}

TEST_CASE("rendering is translation-equivariant away from borders") {
    const Heatmap a = render_joint({12.25, 14.75}, 64, 64, 1.5);
    const Heatmap b = render_joint({17.25, 11.75}, 64, 64, 1.5);
    // Compare on a window fully inside both supports.
    for (int dy = -4; dy <= 4; ++dy) {
        for (int dx = -4; dx <= 4; ++dx) {
            CHECK(a.grid(15 + dy, 12 + dx) ==
                  doctest::Approx(b.grid(12 + dy, 17 + dx)).epsilon(1e-12));
        }
    }
}

TEST_CASE("coordinate quantization through heatmaps") {
    Eigen::Matrix2Xd pts(2, 3);
    pts << 4.3, 10.6, -5.0,
           8.9, 2.2, 4.0;
    const Pose2D quantized = quantize_via_heatmaps(Pose2D(pts), 32, 32, 1.0);
    CHECK(quantized.joints(0, 0) == 4.0);
    CHECK(quantized.joints(1, 0) == 9.0);
    CHECK(quantized.joints(0, 1) == 11.0);
    CHECK(quantized.joints(1, 1) == 2.0);
    // Out-of-grid joints pass through untouched.
    CHECK(quantized.joints(0, 2) == -5.0);
}
