#include "fruitsynth/grasp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include <Eigen/Eigenvalues>

#include "fruitsynth/errors.hpp"

namespace fruitsynth {

void GraspConfig::validate() const {
  if (!(region_radius > 0.0)) throw Error(Errc::InvalidArgument, "grasp: region radius must be > 0");
  if (normal_k < 3) throw Error(Errc::InvalidArgument, "grasp: normal_k must be >= 3");
  if (std::abs(vertical.norm() - 1.0) > 1e-9) throw Error(Errc::InvalidArgument, "grasp: vertical must be a unit vector");
}

std::size_t select_target(std::span<const Detection> dets) {
  if (dets.empty()) throw Error(Errc::NoDetections, "select_target: no detections");
  std::size_t best = 0;
  for (std::size_t i = 1; i < dets.size(); ++i)
    if (dets[i].confidence > dets[best].confidence) best = i;
  return best;
}

Eigen::Vector2d centroid2d(const PointCloud& cloud) {
  if (cloud.empty()) throw Error(Errc::EmptyCloud, "centroid2d: empty cloud");
  Eigen::Vector2d sum = Eigen::Vector2d::Zero();
  for (const auto& p : cloud.points) sum += p.head<2>();
  return sum / static_cast<double>(cloud.size());
}

std::vector<std::size_t> nearest_neighbors(const std::vector<Eigen::Vector3d>& points, const Eigen::Vector3d& query,
                                           int k) {
  std::vector<std::size_t> idx(points.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  const auto kk = std::min(static_cast<std::size_t>(std::max(k, 0)), idx.size());
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(kk), idx.end(),
                    [&](std::size_t a, std::size_t b) {
                      const double da = (points[a] - query).squaredNorm();
                      const double db = (points[b] - query).squaredNorm();
                      return da < db || (da == db && a < b);
                    });
  idx.resize(kk);
  return idx;
}

Eigen::Vector3d estimate_normal(const std::vector<Eigen::Vector3d>& points, std::size_t index, int k,
                                const Eigen::Vector3d& viewpoint) {
  const auto nbrs = nearest_neighbors(points, points[index], k);
  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  for (auto j : nbrs) mean += points[j];
  mean /= static_cast<double>(nbrs.size());
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (auto j : nbrs) {
    const Eigen::Vector3d d = points[j] - mean;
    cov += d * d.transpose();
  }
  cov /= static_cast<double>(nbrs.size());
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(cov);
  Eigen::Vector3d n = solver.eigenvectors().col(0).normalized();  // eigenvalues ascending
  if (n.dot(viewpoint - points[index]) < 0.0) n = -n;
  return n;
}

std::vector<Eigen::Vector3d> estimate_normals(const PointCloud& cloud, int k, const Eigen::Vector3d& viewpoint) {
  if (k < 3 || cloud.size() <= static_cast<std::size_t>(k))
    throw Error(Errc::TooFewPoints, "estimate_normals: need more than k=" + std::to_string(k) + " points, got " +
                                        std::to_string(cloud.size()));
  std::vector<Eigen::Vector3d> normals(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) normals[i] = estimate_normal(cloud.points, i, k, viewpoint);
  return normals;
}

GraspCandidate grasp_point(const PointCloud& instance_cloud, const GraspConfig& cfg) {
  cfg.validate();
  if (instance_cloud.empty()) throw Error(Errc::EmptyCloud, "grasp_point: empty instance cloud");
  if (instance_cloud.size() <= static_cast<std::size_t>(cfg.normal_k))
    throw Error(Errc::TooFewPoints, "grasp_point: need more than normal_k=" + std::to_string(cfg.normal_k) +
                                        " points, got " + std::to_string(instance_cloud.size()));

  std::vector<Eigen::Vector3d> world(instance_cloud.size());
  for (std::size_t i = 0; i < world.size(); ++i) world[i] = cfg.camera_to_world * instance_cloud.points[i];
  const Eigen::Vector3d viewpoint = cfg.camera_to_world.translation();
  const Eigen::Vector3d& up = cfg.vertical;

  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  for (const auto& p : world) mean += p;
  mean /= static_cast<double>(world.size());

  std::vector<double> planar(world.size());
  for (std::size_t i = 0; i < world.size(); ++i) {
    const Eigen::Vector3d d = world[i] - mean;
    planar[i] = (d - d.dot(up) * up).norm();
  }

  double radius = cfg.region_radius;
  std::vector<std::size_t> candidates;
  for (int attempt = 0; attempt <= cfg.radius_doublings; ++attempt, radius *= 2.0) {
    for (std::size_t i = 0; i < world.size(); ++i)
      if (planar[i] <= radius) candidates.push_back(i);
    if (!candidates.empty()) break;
  }
  if (candidates.empty())
    throw Error(Errc::NoCandidates, "grasp_point: no points within " + std::to_string(radius / 2.0) +
                                        " m of the centroid");

  std::vector<Eigen::Vector3d> normals(candidates.size());
  double max_align = -2.0;
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    normals[c] = estimate_normal(world, candidates[c], cfg.normal_k, viewpoint);
    max_align = std::max(max_align, normals[c].dot(up));
  }
  // Everything within the tie tolerance of the best alignment competes on
  // centroid distance, then index (candidates are already in index order).
  std::size_t pick = candidates.size();
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    if (normals[c].dot(up) < max_align - cfg.alignment_tie_tol) continue;
    if (pick == candidates.size() || planar[candidates[c]] < planar[candidates[pick]]) pick = c;
  }
  const std::size_t i = candidates[pick];
  GraspCandidate best{world[i], normals[pick], normals[pick].dot(up), planar[i], i, radius};
  return best;
}

}  // namespace fruitsynth
