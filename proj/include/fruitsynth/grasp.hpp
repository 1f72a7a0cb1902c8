#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "fruitsynth/cloud.hpp"
#include "fruitsynth/metrics.hpp"

namespace fruitsynth {

struct GraspConfig {
  double region_radius = 0.010;  // meters
  int normal_k = 30;
  Eigen::Vector3d vertical = Eigen::Vector3d::UnitZ();  // world frame
  Eigen::Isometry3d camera_to_world = Eigen::Isometry3d::Identity();
  /// Alignments closer than this are treated as equal and fall through to the
  /// centroid-distance tie rule.
  double alignment_tie_tol = 1e-6;
  /// When the region is empty the radius is doubled this many times before giving up.
  int radius_doublings = 1;

  void validate() const;
};

struct GraspCandidate {
  Eigen::Vector3d point = Eigen::Vector3d::Zero();   // world frame
  Eigen::Vector3d normal = Eigen::Vector3d::UnitZ();  // world frame, unit
  double alignment = 0.0;      // normal . vertical
  double centroid_dist = 0.0;  // planar distance to the centroid
  std::size_t index = 0;       // index into the instance cloud
  double radius_used = 0.0;
};

/// Highest confidence wins; ties go to the lowest index. Throws NoDetections.
std::size_t select_target(std::span<const Detection> dets);

/// Mean x and y of the cloud. Throws EmptyCloud.
Eigen::Vector2d centroid2d(const PointCloud& cloud);

/// Indices of the k nearest points to `query` (the query itself included when it is a member).
std::vector<std::size_t> nearest_neighbors(const std::vector<Eigen::Vector3d>& points, const Eigen::Vector3d& query,
                                           int k);

/// Normal of one point from the covariance of its k nearest neighbours: the
/// eigenvector of the smallest eigenvalue, flipped to face `viewpoint`.
Eigen::Vector3d estimate_normal(const std::vector<Eigen::Vector3d>& points, std::size_t index, int k,
                                const Eigen::Vector3d& viewpoint);

/// Per-point normals oriented toward `viewpoint` (the camera origin by
/// default). Requires point count > k >= 3, else TooFewPoints.
std::vector<Eigen::Vector3d> estimate_normals(const PointCloud& cloud, int k,
                                              const Eigen::Vector3d& viewpoint = Eigen::Vector3d::Zero());

/// Suction grasp point for one instance cloud given in the camera frame.
/// Candidates are points whose distance to the centroid, measured in the
/// plane orthogonal to cfg.vertical, is within the region radius; the one
/// whose normal best aligns with the vertical wins (ties: closer to the
/// centroid, then lower index). The radius doubles cfg.radius_doublings times
/// before NoCandidates is thrown.
GraspCandidate grasp_point(const PointCloud& instance_cloud, const GraspConfig& cfg);

}  // namespace fruitsynth
