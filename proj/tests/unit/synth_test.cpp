#include <gtest/gtest.h>

#include <numbers>
#include <random>

#include "test_support.hpp"
#include "voxelfeat/synth.hpp"

using namespace voxelfeat;
using namespace voxelfeat::testing;

namespace {

const CameraIntrinsics kCam{50.0, 50.0, 32.0, 32.0, 64, 64};

SyntheticScene unit_sphere_scene() {
    SyntheticScene scene;
    scene.spheres.push_back({Eigen::Vector3d(0.0, 0.0, 2.0), 1.0, Eigen::Vector3d(0.2, 0.4, 0.6), 0.8});
    return scene;
}

}  // namespace

TEST(Render, PrincipalPixelHitsTheNearPole) {
    const RenderedView view = render_depth(unit_sphere_scene(), kCam, RigidTransform::identity());
    ASSERT_TRUE(view.depth.is_valid(32, 32));
    EXPECT_NEAR(view.depth.at(32, 32), 1.0, 1e-12);
    EXPECT_EQ(view.rgb.at(32, 32, 2), 0.6);
    EXPECT_EQ(view.saliency.at(32, 32), 0.8);
}

TEST(Render, MissedPixelsAreInvalidAndBlack) {
    const RenderedView view = render_depth(unit_sphere_scene(), kCam, RigidTransform::identity());
    // The corner ray leaves at about 45 degrees and misses a sphere of
    // angular radius 30 degrees.
    EXPECT_FALSE(view.depth.is_valid(0, 0));
    EXPECT_EQ(view.rgb.at(0, 0, 0), 0.0);
    EXPECT_EQ(view.saliency.at(0, 0), 0.0);
}

TEST(Render, BackProjectedHitsLieOnTheSurface) {
    const SyntheticScene scene = unit_sphere_scene();
    const RigidTransform pose = look_at({1.5, -2.0, 0.5}, {0.0, 0.0, 2.0}, Eigen::Vector3d::UnitZ());
    const RenderedView view = render_depth(scene, kCam, pose);
    int hits = 0;
    for (int r = 0; r < kCam.height; ++r) {
        for (int c = 0; c < kCam.width; ++c) {
            if (!view.depth.is_valid(r, c)) continue;
            ++hits;
            const Eigen::Vector3d world = pose.apply(backproject_pixel(c, r, view.depth.at(r, c), kCam));
            ASSERT_LT(std::abs((world - Eigen::Vector3d(0.0, 0.0, 2.0)).norm() - 1.0), 1e-6);
        }
    }
    EXPECT_GT(hits, 100);
}

TEST(Render, NearestPrimitiveWins) {
    SyntheticScene scene = unit_sphere_scene();
    scene.boxes.push_back({{-0.1, -0.1, 0.4}, {0.1, 0.1, 0.5}, Eigen::Vector3d(1.0, 1.0, 0.0), 0.1});
    const RenderedView view = render_depth(scene, kCam, RigidTransform::identity());
    EXPECT_NEAR(view.depth.at(32, 32), 0.4, 1e-12);
    EXPECT_EQ(view.saliency.at(32, 32), 0.1);
}

TEST(Render, EmptyOrInvalidScene) {
    EXPECT_EQ(error_code_of([] { render_depth(SyntheticScene{}, kCam, RigidTransform::identity()); }),
              ErrorCode::kParameter);
    SyntheticScene bad;
    bad.spheres.push_back({Eigen::Vector3d::Zero(), -1.0});
    EXPECT_EQ(error_code_of([&] { render_depth(bad, kCam, RigidTransform::identity()); }), ErrorCode::kParameter);
}

TEST(Scene, SurfaceDistance) {
    SyntheticScene scene = unit_sphere_scene();
    EXPECT_NEAR(scene.surface_distance({0.0, 0.0, 2.0}), 1.0, 1e-15);
    EXPECT_NEAR(scene.surface_distance({0.0, 0.0, 4.0}), 1.0, 1e-15);
    scene.boxes.push_back({{5.0, 5.0, 5.0}, {6.0, 6.0, 6.0}});
    EXPECT_NEAR(scene.surface_distance({5.5, 5.5, 5.9}), 0.1, 1e-12);
    EXPECT_NEAR(scene.surface_distance({7.0, 5.5, 5.5}), 1.0, 1e-12);
}

TEST(Rig, ThreeCamerasAimAtTheTarget) {
    const Eigen::Vector3d target(0.1, 0.2, 0.9);
    const auto rig = three_camera_rig(target, 1.6);
    ASSERT_EQ(rig.size(), 3u);
    for (const auto& pose : rig) {
        EXPECT_TRUE(pose.is_rigid());
        const Eigen::Vector3d in_cam = pose.inverse().apply(target);
        EXPECT_NEAR(in_cam.x(), 0.0, 1e-9);
        EXPECT_NEAR(in_cam.y(), 0.0, 1e-9);
        EXPECT_GT(in_cam.z(), 1.0);
    }
    EXPECT_GT((rig[1].translation() - rig[2].translation()).norm(), 0.5);
}

TEST(Intrinsics, FieldOfView) {
    const CameraIntrinsics intr = make_intrinsics(128, 96, 90.0);
    EXPECT_EQ(intr.width, 128);
    EXPECT_EQ(intr.height, 96);
    EXPECT_NEAR(intr.fx, intr.fy, 1e-12);
    // Half the width spans 45 degrees.
    EXPECT_NEAR(std::atan((intr.width - 1 - intr.cx) / intr.fx) + std::atan(intr.cx / intr.fx),
                std::numbers::pi / 2, 0.02);
}

TEST(RandomCloud, SeededAndInBounds) {
    const WorkspaceBounds bounds;
    const FeaturedPointCloud a = random_cloud(1000, 3, bounds, 9);
    EXPECT_EQ(a, random_cloud(1000, 3, bounds, 9));
    EXPECT_NE(a, random_cloud(1000, 3, bounds, 10));
    EXPECT_EQ(a.size(), 1000u);
    EXPECT_EQ(a.saliency_channels(), 3);
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_TRUE(bounds.contains(a.position(i)));
        for (double s : a.saliency(i)) {
            EXPECT_GE(s, 0.0);
            EXPECT_LE(s, 1.0);
        }
    }
}

TEST(SyntheticEpisode, WritesALoadableEpisode) {
    TempDir dir;
    SynthEpisodeOptions options;
    options.frames = 8;
    options.width = options.height = 24;
    options.patch_size = 6;
    const auto path = write_synthetic_episode(dir.path(), options);
    EXPECT_TRUE(std::filesystem::exists(path));
    EXPECT_TRUE(std::filesystem::exists(dir / "poses_front.txt"));
    options.frames = 3;
    EXPECT_EQ(error_code_of([&] { write_synthetic_episode(dir / "b", options); }), ErrorCode::kParameter);
}
