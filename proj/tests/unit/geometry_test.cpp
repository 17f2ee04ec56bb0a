#include <gtest/gtest.h>

#include <limits>
#include <random>

#include "test_support.hpp"
#include "voxelfeat/geometry.hpp"
#include "voxelfeat/synth.hpp"

using namespace voxelfeat;
using voxelfeat::testing::error_code_of;

namespace {

const CameraIntrinsics kIntr{120.0, 110.0, 63.5, 47.5, 128, 96};

// Forward pinhole projection, written independently of the library.
Eigen::Vector3d project(const Eigen::Vector3d& p, const CameraIntrinsics& k) {
    return {k.fx * p.x() / p.z() + k.cx, k.fy * p.y() / p.z() + k.cy, p.z()};
}

}  // namespace

TEST(Backproject, PrincipalPointIsOpticalAxis) {
    const Eigen::Vector3d p = backproject_pixel(kIntr.cx, kIntr.cy, 1.5, kIntr);
    EXPECT_EQ(p, Eigen::Vector3d(0.0, 0.0, 1.5));
}

TEST(Backproject, UnitTangentOffsetScalesWithDepth) {
    const CameraIntrinsics k{50.0, 50.0, 10.0, 10.0, 100, 100};
    const Eigen::Vector3d p = backproject_pixel(k.cx + k.fx, k.cy, 2.0, k);
    EXPECT_NEAR(p.x(), 2.0, 1e-12);
    EXPECT_NEAR(p.y(), 0.0, 1e-12);
    EXPECT_EQ(p.z(), 2.0);
}

TEST(Backproject, RoundTripThroughForwardProjection) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, kIntr.width - 1.0), v(0.0, kIntr.height - 1.0), d(0.05, 20.0);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const Eigen::Vector3d uvd(u(rng), v(rng), d(rng));
        const Eigen::Vector3d back = project(backproject_pixel(uvd.x(), uvd.y(), uvd.z(), kIntr), kIntr);
        worst = std::max(worst, (back - uvd).cwiseAbs().maxCoeff());
    }
    EXPECT_LT(worst, 1e-9);
}

TEST(Backproject, RejectsInvalidDepth) {
    for (double d : {0.0, -1.0, std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::infinity()}) {
        EXPECT_EQ(error_code_of([&] { backproject_pixel(1.0, 1.0, d, kIntr); }), ErrorCode::kInvalidDepth) << d;
    }
}

TEST(Backproject, RejectsPixelOutsideImage) {
    EXPECT_EQ(error_code_of([] { backproject_pixel(-0.5, 1.0, 1.0, kIntr); }), ErrorCode::kParameter);
    EXPECT_EQ(error_code_of([] { backproject_pixel(1.0, 96.0, 1.0, kIntr); }), ErrorCode::kParameter);
}

TEST(Intrinsics, ValidateChecksRanges) {
    EXPECT_NO_THROW(kIntr.validate());
    CameraIntrinsics bad = kIntr;
    bad.fx = 0.0;
    EXPECT_EQ(error_code_of([&] { bad.validate(); }), ErrorCode::kParameter);
    bad = kIntr;
    bad.cx = kIntr.width;
    EXPECT_EQ(error_code_of([&] { bad.validate(); }), ErrorCode::kParameter);
    bad = kIntr;
    bad.cy = -0.1;
    EXPECT_EQ(error_code_of([&] { bad.validate(); }), ErrorCode::kParameter);
}

TEST(Intrinsics, RescaledKeepsFieldOfView) {
    const CameraIntrinsics k = make_intrinsics(128, 128, 60.0);
    const CameraIntrinsics s = k.rescaled(74, 74);
    EXPECT_EQ(s.width, 74);
    // The corner pixel ray keeps its direction.
    const Eigen::Vector3d a = backproject_pixel(0.0, 0.0, 1.0, k);
    const Eigen::Vector3d b = backproject_pixel(0.0, 0.0, 1.0, s);
    EXPECT_NEAR((a - b).norm(), 0.0, 1e-12);
}

TEST(RigidTransformTest, IdentityLeavesPointsUnchanged) {
    const std::vector<Eigen::Vector3d> pts = {{1, 2, 3}, {-4, 0.5, 9}};
    EXPECT_EQ(transform_points(pts, RigidTransform::identity()), pts);
}

TEST(RigidTransformTest, PureTranslation) {
    const std::vector<Eigen::Vector3d> pts = {Eigen::Vector3d::Zero()};
    const auto out = transform_points(pts, RigidTransform(Eigen::Matrix3d::Identity(), {1, 0, 0}));
    EXPECT_EQ(out[0], Eigen::Vector3d(1, 0, 0));
}

TEST(RigidTransformTest, PreservesPairwiseDistances) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> c(-3.0, 3.0);
    for (int trial = 0; trial < 10; ++trial) {
        const auto pose = RigidTransform::from_quaternion(voxelfeat::testing::random_rotation(rng),
                                                          {c(rng), c(rng), c(rng)});
        std::vector<Eigen::Vector3d> pts(100);
        for (auto& p : pts) p = {c(rng), c(rng), c(rng)};
        const auto out = transform_points(pts, pose);
        for (std::size_t i = 0; i < pts.size(); ++i) {
            for (std::size_t j = i + 1; j < pts.size(); ++j) {
                const double before = (pts[i] - pts[j]).norm();
                const double after = (out[i] - out[j]).norm();
                EXPECT_LE(std::abs(before - after), 1e-9 * before);
            }
        }
    }
}

TEST(RigidTransformTest, RejectsNonOrthonormalRotation) {
    Eigen::Matrix3d r = Eigen::Matrix3d::Identity();
    r(0, 0) = 1.01;
    const std::vector<Eigen::Vector3d> pts = {Eigen::Vector3d::Zero()};
    EXPECT_EQ(error_code_of([&] { transform_points(pts, RigidTransform(r, Eigen::Vector3d::Zero())); }),
              ErrorCode::kInvalidTransform);
    Eigen::Matrix3d reflection = Eigen::Matrix3d::Identity();
    reflection(2, 2) = -1.0;
    EXPECT_FALSE(RigidTransform(reflection, Eigen::Vector3d::Zero()).is_rigid());
}

TEST(RigidTransformTest, InverseComposesToIdentity) {
    std::mt19937_64 rng(8);
    const auto pose = RigidTransform::from_quaternion(voxelfeat::testing::random_rotation(rng), {0.3, -2.0, 1.0});
    const RigidTransform id = pose * pose.inverse();
    EXPECT_TRUE(id.rotation().isApprox(Eigen::Matrix3d::Identity(), 1e-12));
    EXPECT_LT(id.translation().norm(), 1e-12);
    const Eigen::Vector3d p(0.4, 0.5, 0.6);
    EXPECT_LT((pose.inverse().apply(pose.apply(p)) - p).norm(), 1e-12);
}

TEST(LookAt, ForwardHitsTargetAndImageUpMatchesWorldUp) {
    const Eigen::Vector3d eye(1.0, -2.0, 1.5), target(0.0, 0.0, 0.8);
    const RigidTransform pose = look_at(eye, target, Eigen::Vector3d::UnitZ());
    EXPECT_TRUE(pose.is_rigid());
    const Eigen::Vector3d forward = pose.rotation().col(2);
    EXPECT_NEAR(forward.dot((target - eye).normalized()), 1.0, 1e-12);
    // Camera +Y is image-down, so it must point away from world up.
    EXPECT_LT(pose.rotation().col(1).dot(Eigen::Vector3d::UnitZ()), 0.0);
    EXPECT_EQ(error_code_of([] { look_at({0, 0, 0}, {0, 0, 1}, Eigen::Vector3d::UnitZ()); }), ErrorCode::kParameter);
}

namespace {

struct ViewData {
    RgbImage rgb;
    DepthImage depth;
    Image saliency;
};

ViewData make_view(int h, int w, int k, double depth) {
    ViewData v{RgbImage(h, w, 3, 0.25), DepthImage(h, w), Image(h, w, k, 0.75)};
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) v.depth.set(r, c, depth);
    }
    return v;
}

}  // namespace

TEST(FuseViews, AllInvalidDepthGivesEmptyCloud) {
    ViewData v{RgbImage(3, 4, 3), DepthImage(3, 4), Image(3, 4, 1)};
    const CameraIntrinsics k{10, 10, 1.5, 1.0, 4, 3};
    const std::vector<CameraView> views = {{v.rgb, v.depth, v.saliency, k, RigidTransform::identity()}};
    EXPECT_EQ(fuse_views(views).size(), 0u);
}

TEST(FuseViews, EmptyViewListGivesEmptyCloud) {
    EXPECT_TRUE(fuse_views(std::vector<CameraView>{}).empty());
}

TEST(FuseViews, TwoByTwoViewGivesFourPoints) {
    ViewData v = make_view(2, 2, 1, 1.0);
    const CameraIntrinsics k{10, 10, 0.5, 0.5, 2, 2};
    const std::vector<CameraView> views = {{v.rgb, v.depth, v.saliency, k, RigidTransform::identity()}};
    const FeaturedPointCloud cloud = fuse_views(views);
    ASSERT_EQ(cloud.size(), 4u);
    EXPECT_EQ(cloud.color(3), Eigen::Vector3d::Constant(0.25));
    EXPECT_EQ(cloud.saliency(2)[0], 0.75);
}

TEST(FuseViews, CountEqualsValidPixelsAndOrderIsViewThenRowMajor) {
    std::mt19937_64 rng(2);
    std::bernoulli_distribution keep(0.6);
    std::vector<ViewData> data;
    std::size_t expected = 0;
    for (int vi = 0; vi < 3; ++vi) {
        ViewData v = make_view(7, 9, 2, 1.0);
        for (int r = 0; r < 7; ++r) {
            for (int c = 0; c < 9; ++c) {
                if (r == 0 && c == 0) {
                    v.depth.set(r, c, 50.0);  // valid but beyond the default range
                } else if (keep(rng)) {
                    v.depth.set(r, c, 0.5 + 0.1 * vi + 0.01 * r + 0.001 * c);
                    ++expected;
                } else {
                    v.depth.invalidate(r, c);
                }
            }
        }
        data.push_back(std::move(v));
    }
    const CameraIntrinsics k{12, 12, 4.0, 3.0, 9, 7};
    std::vector<CameraView> views;
    for (const auto& v : data) views.push_back({v.rgb, v.depth, v.saliency, k, RigidTransform::identity()});

    const FeaturedPointCloud cloud = fuse_views(views);
    ASSERT_EQ(cloud.size(), expected);
    // Depth encodes (view, row, col) and must increase along the output.
    for (std::size_t i = 1; i < cloud.size(); ++i) EXPECT_LT(cloud.position(i - 1).z(), cloud.position(i).z());

    FuseOptions threaded;
    threaded.threads = 4;
    EXPECT_EQ(fuse_views(views, threaded), cloud);
}

TEST(FuseViews, SkipsDepthBeyondMaxRange) {
    ViewData v = make_view(2, 3, 0, 4.0);
    v.depth.set(1, 1, 12.0);
    const CameraIntrinsics k{10, 10, 1.0, 0.5, 3, 2};
    const std::vector<CameraView> views = {{v.rgb, v.depth, v.saliency, k, RigidTransform::identity()}};
    EXPECT_EQ(fuse_views(views).size(), 5u);
    FuseOptions near;
    near.max_depth = 3.0;
    EXPECT_EQ(fuse_views(views, near).size(), 0u);
}

TEST(FuseViews, ShapeMismatchIsAnError) {
    ViewData v = make_view(4, 4, 1, 1.0);
    Image small_saliency(3, 4, 1);
    const CameraIntrinsics k{10, 10, 1.5, 1.5, 4, 4};
    const std::vector<CameraView> bad_saliency = {{v.rgb, v.depth, small_saliency, k, RigidTransform::identity()}};
    EXPECT_EQ(error_code_of([&] { fuse_views(bad_saliency); }), ErrorCode::kShape);

    DepthImage small_depth(4, 3);
    const std::vector<CameraView> bad_depth = {{v.rgb, small_depth, v.saliency, k, RigidTransform::identity()}};
    EXPECT_EQ(error_code_of([&] { fuse_views(bad_depth); }), ErrorCode::kShape);

    ViewData other = make_view(4, 4, 2, 1.0);
    const std::vector<CameraView> mixed_k = {{v.rgb, v.depth, v.saliency, k, RigidTransform::identity()},
                                             {other.rgb, other.depth, other.saliency, k, RigidTransform::identity()}};
    EXPECT_EQ(error_code_of([&] { fuse_views(mixed_k); }), ErrorCode::kShape);
}

TEST(FuseViews, ThreeViewsOfSphereLieOnItsSurface) {
    SyntheticScene scene;
    const Eigen::Vector3d center(0.1, 0.2, 0.9);
    const double radius = 0.25;
    scene.spheres.push_back({center, radius, {1, 0, 0}, 0.8});
    const CameraIntrinsics k = make_intrinsics(64, 64, 60.0);
    std::vector<RenderedView> rendered;
    for (const auto& pose : three_camera_rig(center, 1.5)) rendered.push_back(render_depth(scene, k, pose));
    const auto rig = three_camera_rig(center, 1.5);
    std::vector<CameraView> views;
    for (std::size_t i = 0; i < rendered.size(); ++i) {
        views.push_back({rendered[i].rgb, rendered[i].depth, rendered[i].saliency, k, rig[i]});
    }
    const FeaturedPointCloud cloud = fuse_views(views);
    ASSERT_GT(cloud.size(), 100u);
    double worst = 0.0;
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        worst = std::max(worst, std::abs((cloud.position(i) - center).norm() - radius));
    }
    EXPECT_LT(worst, 1e-6);
}

TEST(PointCloud, PermutedReordersEveryArray) {
    FeaturedPointCloud cloud(2);
    const double s0[] = {0.1, 0.2}, s1[] = {0.3, 0.4};
    cloud.push_back({1, 2, 3}, {0.1, 0.1, 0.1}, s0);
    cloud.push_back({4, 5, 6}, {0.9, 0.9, 0.9}, s1);
    const std::vector<std::size_t> order = {1, 0};
    const FeaturedPointCloud p = cloud.permuted(order);
    EXPECT_EQ(p.position(0), Eigen::Vector3d(4, 5, 6));
    EXPECT_EQ(p.saliency(0)[1], 0.4);
    EXPECT_EQ(p.color(1), Eigen::Vector3d::Constant(0.1));
}
