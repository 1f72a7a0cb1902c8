#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "fruitsynth/image.hpp"
#include "fruitsynth/rng.hpp"

namespace fruitsynth {

struct PixelRef {
  int u = 0;
  int v = 0;
  bool operator==(const PixelRef&) const = default;
};

/// Points in meters, camera frame unless stated otherwise. pixel_ref, when
/// present, holds the source depth pixel of each point.
struct PointCloud {
  std::vector<Eigen::Vector3d> points;
  std::optional<std::vector<PixelRef>> pixel_ref;

  std::size_t size() const noexcept { return points.size(); }
  bool empty() const noexcept { return points.empty(); }
};

inline constexpr int kNoise = -1;
/// Cluster id >= 0 per point, or kNoise.
using ClusterLabels = std::vector<int>;

struct PlaneModel {
  Eigen::Vector3d normal = Eigen::Vector3d::UnitZ();  // unit length
  double offset = 0.0;                                // normal . p + offset = 0

  double distance(const Eigen::Vector3d& p) const { return std::abs(normal.dot(p) + offset); }
};

struct PlaneFit {
  PlaneModel plane;
  std::vector<std::size_t> inliers;  // ascending
};

/// Pinhole back-projection of valid (non-zero) depth pixels, optionally
/// restricted to a region of interest. Depth is millimeters on input.
PointCloud backproject(const DepthImage& depth, const CameraIntrinsics& intr,
                       const std::optional<BitMask>& roi = std::nullopt);

/// Nearest pixel of a camera-frame point.
PixelRef project(const Eigen::Vector3d& point, const CameraIntrinsics& intr);

/// Points whose pixel_ref is set in `mask`. Throws NoPixelRef.
PointCloud mask_to_cloud(const PointCloud& cloud, const BitMask& mask);

PointCloud select_points(const PointCloud& cloud, const std::vector<std::size_t>& indices);
std::vector<std::size_t> complement_indices(std::size_t n, const std::vector<std::size_t>& sorted_indices);

/// Best-of-`iterations` three-point plane hypotheses scored by inlier count
/// (first found wins ties). Throws DegenerateCloud for fewer than three points
/// or when every sampled triple is collinear.
PlaneFit ransac_plane(const PointCloud& cloud, double dist_thresh, int iterations, Rng& rng);

struct KMeansResult {
  ClusterLabels labels;
  std::vector<Eigen::Vector3d> centroids;
  std::vector<double> objective;  // sum of squared distances after each update
  int iterations = 0;
};

/// k-means++ seeding followed by Lloyd iterations until the assignment stops
/// changing or max_iters is reached. Labels are renumbered densely by first
/// appearance. Throws TooFewPoints when the cloud has fewer than k points.
KMeansResult kmeans_detailed(const PointCloud& cloud, int k, int max_iters, Rng& rng);
ClusterLabels kmeans(const PointCloud& cloud, int k, int max_iters, Rng& rng);

/// DBSCAN with neighbourhoods |p - q| <= eps counting the point itself.
/// Points are scanned in index order; a border point joins the first cluster
/// that reaches it.
ClusterLabels dbscan(const PointCloud& cloud, double eps, int min_pts);

/// Renumbers clusters by first appearance; noise stays kNoise.
ClusterLabels canonical_labels(const ClusterLabels& labels);

struct CloudSegScores {
  double ap = 0.0;
  double ar = 0.0;
  double f1 = 0.0;
  std::size_t n_pred = 0;
  std::size_t n_gt = 0;
  std::size_t matched = 0;
};

/// Class-agnostic scoring of predicted clusters against ground-truth
/// instances over the same point indexing. Cluster confidence is its size
/// divided by the largest cluster size. Throws EmptyGroundTruth.
CloudSegScores cloud_seg_metrics(const ClusterLabels& pred, const ClusterLabels& gt, double iou_threshold);

/// ASCII export: "x y z [u v] [label]" per line, fixed 6-decimal precision.
void write_xyz(const std::filesystem::path& path, const PointCloud& cloud, const ClusterLabels* labels = nullptr);

/// Reads 3 (xyz), 4 (xyz label), 5 (xyz u v) or 6 (xyz u v label) columns.
std::pair<PointCloud, std::optional<ClusterLabels>> read_xyz(const std::filesystem::path& path);

}  // namespace fruitsynth
