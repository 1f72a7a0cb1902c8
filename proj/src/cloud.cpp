#include "fruitsynth/cloud.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <string>
#include <unordered_map>

#include <Eigen/Geometry>

#include "fruitsynth/errors.hpp"
#include "fruitsynth/metrics.hpp"

namespace fruitsynth {

namespace {

struct CellKey {
  std::int64_t x, y, z;
  bool operator==(const CellKey&) const = default;
};

struct CellHash {
  std::size_t operator()(const CellKey& k) const noexcept {
    std::uint64_t h = static_cast<std::uint64_t>(k.x) * 0x9e3779b97f4a7c15ULL;
    h ^= static_cast<std::uint64_t>(k.y) * 0xc2b2ae3d27d4eb4fULL + (h << 6) + (h >> 2);
    h ^= static_cast<std::uint64_t>(k.z) * 0x165667b19e3779f9ULL + (h << 6) + (h >> 2);
    return static_cast<std::size_t>(h);
  }
};

/// Uniform hash grid with cell size equal to the query radius.
class RadiusGrid {
 public:
  RadiusGrid(const std::vector<Eigen::Vector3d>& points, double radius) : points_(points), radius_(radius) {
    for (std::size_t i = 0; i < points.size(); ++i) cells_[key(points[i])].push_back(i);
  }

  void query(std::size_t i, std::vector<std::size_t>& out) const {
    out.clear();
    const auto& p = points_[i];
    const CellKey c = key(p);
    const double r2 = radius_ * radius_;
    for (std::int64_t dx = -1; dx <= 1; ++dx)
      for (std::int64_t dy = -1; dy <= 1; ++dy)
        for (std::int64_t dz = -1; dz <= 1; ++dz) {
          auto it = cells_.find(CellKey{c.x + dx, c.y + dy, c.z + dz});
          if (it == cells_.end()) continue;
          for (std::size_t j : it->second)
            if ((points_[j] - p).squaredNorm() <= r2) out.push_back(j);
        }
  }

 private:
  CellKey key(const Eigen::Vector3d& p) const {
    return CellKey{static_cast<std::int64_t>(std::floor(p.x() / radius_)),
                   static_cast<std::int64_t>(std::floor(p.y() / radius_)),
                   static_cast<std::int64_t>(std::floor(p.z() / radius_))};
  }

  const std::vector<Eigen::Vector3d>& points_;
  double radius_;
  std::unordered_map<CellKey, std::vector<std::size_t>, CellHash> cells_;
};

}  // namespace

PointCloud backproject(const DepthImage& depth, const CameraIntrinsics& intr, const std::optional<BitMask>& roi) {
  intr.validate();
  if (roi && (roi->width() != depth.width() || roi->height() != depth.height()))
    throw Error(Errc::DimensionMismatch, "backproject: roi and depth dims differ");
  PointCloud cloud;
  cloud.pixel_ref.emplace();
  for (int v = 0; v < depth.height(); ++v) {
    for (int u = 0; u < depth.width(); ++u) {
      const std::uint16_t mm = depth.at(u, v);
      if (mm == 0 || (roi && !roi->get(u, v))) continue;
      const double z = mm / 1000.0;
      cloud.points.emplace_back((u - intr.cx) * z / intr.fx, (v - intr.cy) * z / intr.fy, z);
      cloud.pixel_ref->push_back(PixelRef{u, v});
    }
  }
  return cloud;
}

PixelRef project(const Eigen::Vector3d& p, const CameraIntrinsics& intr) {
  return PixelRef{static_cast<int>(std::lround(intr.fx * p.x() / p.z() + intr.cx)),
                  static_cast<int>(std::lround(intr.fy * p.y() / p.z() + intr.cy))};
}

PointCloud mask_to_cloud(const PointCloud& cloud, const BitMask& mask) {
  if (!cloud.pixel_ref) throw Error(Errc::NoPixelRef, "mask_to_cloud: cloud has no pixel back-references");
  PointCloud out;
  out.pixel_ref.emplace();
  const auto& refs = *cloud.pixel_ref;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto& r = refs[i];
    if (r.u < 0 || r.v < 0 || r.u >= mask.width() || r.v >= mask.height() || !mask.get(r.u, r.v)) continue;
    out.points.push_back(cloud.points[i]);
    out.pixel_ref->push_back(r);
  }
  return out;
}

PointCloud select_points(const PointCloud& cloud, const std::vector<std::size_t>& indices) {
  PointCloud out;
  if (cloud.pixel_ref) out.pixel_ref.emplace();
  out.points.reserve(indices.size());
  for (std::size_t i : indices) {
    out.points.push_back(cloud.points.at(i));
    if (cloud.pixel_ref) out.pixel_ref->push_back((*cloud.pixel_ref)[i]);
  }
  return out;
}

std::vector<std::size_t> complement_indices(std::size_t n, const std::vector<std::size_t>& sorted_indices) {
  std::vector<std::size_t> out;
  out.reserve(n - std::min(n, sorted_indices.size()));
  std::size_t k = 0;
  for (std::size_t i = 0; i < n; ++i) {
    while (k < sorted_indices.size() && sorted_indices[k] < i) ++k;
    if (k < sorted_indices.size() && sorted_indices[k] == i) continue;
    out.push_back(i);
  }
  return out;
}

PlaneFit ransac_plane(const PointCloud& cloud, double dist_thresh, int iterations, Rng& rng) {
  const std::size_t n = cloud.size();
  if (n < 3) throw Error(Errc::DegenerateCloud, "ransac_plane: need at least 3 points, got " + std::to_string(n));
  if (iterations < 1) throw Error(Errc::InvalidArgument, "ransac_plane: iterations must be >= 1");
  const auto& pts = cloud.points;

  std::optional<PlaneModel> best;
  std::size_t best_count = 0;
  for (int it = 0; it < iterations; ++it) {
    const std::size_t a = rng.index(n);
    std::size_t b = rng.index(n - 1);
    if (b >= a) ++b;
    std::size_t c = rng.index(n - 2);
    if (c >= std::min(a, b)) ++c;
    if (c >= std::max(a, b)) ++c;

    const Eigen::Vector3d cross = (pts[b] - pts[a]).cross(pts[c] - pts[a]);
    const double norm = cross.norm();
    const double scale = std::max((pts[b] - pts[a]).norm() * (pts[c] - pts[a]).norm(), 1e-300);
    if (norm <= 1e-12 * scale) continue;  // collinear triple
    PlaneModel model;
    model.normal = cross / norm;
    model.offset = -model.normal.dot(pts[a]);

    std::size_t count = 0;
    for (const auto& p : pts)
      if (model.distance(p) <= dist_thresh) ++count;
    if (!best || count > best_count) {
      best = model;
      best_count = count;
    }
  }
  if (!best) throw Error(Errc::DegenerateCloud, "ransac_plane: every sampled triple was collinear");

  // Canonical sign: the largest-magnitude normal component is positive.
  Eigen::Index major = 0;
  best->normal.cwiseAbs().maxCoeff(&major);
  if (best->normal[major] < 0) {
    best->normal = -best->normal;
    best->offset = -best->offset;
  }
  PlaneFit fit{*best, {}};
  for (std::size_t i = 0; i < n; ++i)
    if (fit.plane.distance(pts[i]) <= dist_thresh) fit.inliers.push_back(i);
  return fit;
}

ClusterLabels canonical_labels(const ClusterLabels& labels) {
  std::unordered_map<int, int> remap;
  ClusterLabels out(labels.size(), kNoise);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0) continue;
    auto [it, inserted] = remap.try_emplace(labels[i], static_cast<int>(remap.size()));
    out[i] = it->second;
  }
  return out;
}

KMeansResult kmeans_detailed(const PointCloud& cloud, int k, int max_iters, Rng& rng) {
  if (k < 1) throw Error(Errc::InvalidArgument, "kmeans: k must be >= 1");
  if (max_iters < 1) throw Error(Errc::InvalidArgument, "kmeans: max_iters must be >= 1");
  const std::size_t n = cloud.size();
  const auto kk = static_cast<std::size_t>(k);
  if (n < kk) throw Error(Errc::TooFewPoints, "kmeans: " + std::to_string(n) + " points for k=" + std::to_string(k));
  const auto& pts = cloud.points;

  // k-means++ seeding.
  std::vector<Eigen::Vector3d> centroids;
  std::vector<char> chosen(n, 0);
  std::vector<double> d2(n, std::numeric_limits<double>::infinity());
  std::size_t first = rng.index(n);
  centroids.push_back(pts[first]);
  chosen[first] = 1;
  while (centroids.size() < kk) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], (pts[i] - centroids.back()).squaredNorm());
      total += d2[i];
    }
    std::size_t pick = n;
    if (total > 0.0) {
      const double r = rng.uniform01() * total;
      double cum = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (d2[i] <= 0.0) continue;
        cum += d2[i];
        pick = i;
        if (cum > r) break;
      }
    } else {
      std::vector<std::size_t> free;
      for (std::size_t i = 0; i < n; ++i)
        if (!chosen[i]) free.push_back(i);
      pick = free[rng.index(free.size())];
    }
    chosen[pick] = 1;
    centroids.push_back(pts[pick]);
  }

  KMeansResult result;
  ClusterLabels assign(n, -1);
  for (int iter = 0; iter < max_iters; ++iter) {
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      int best = 0;
      double best_d = (pts[i] - centroids[0]).squaredNorm();
      for (std::size_t c = 1; c < kk; ++c) {
        const double d = (pts[i] - centroids[c]).squaredNorm();
        if (d < best_d) {
          best_d = d;
          best = static_cast<int>(c);
        }
      }
      if (assign[i] != best) {
        assign[i] = best;
        changed = true;
      }
    }
    if (!changed) break;
    result.iterations = iter + 1;

    std::vector<Eigen::Vector3d> sums(kk, Eigen::Vector3d::Zero());
    std::vector<std::size_t> counts(kk, 0);
    for (std::size_t i = 0; i < n; ++i) {
      sums[static_cast<std::size_t>(assign[i])] += pts[i];
      ++counts[static_cast<std::size_t>(assign[i])];
    }
    for (std::size_t c = 0; c < kk; ++c)
      if (counts[c] > 0) centroids[c] = sums[c] / static_cast<double>(counts[c]);  // empty clusters keep their centroid

    double obj = 0.0;
    for (std::size_t i = 0; i < n; ++i) obj += (pts[i] - centroids[static_cast<std::size_t>(assign[i])]).squaredNorm();
    result.objective.push_back(obj);
  }

  result.labels = canonical_labels(assign);
  result.centroids.assign(kk, Eigen::Vector3d::Zero());
  std::vector<char> seen(kk, 0);
  std::size_t next_free = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto dense = static_cast<std::size_t>(result.labels[i]);
    if (!seen[dense]) {
      seen[dense] = 1;
      result.centroids[dense] = centroids[static_cast<std::size_t>(assign[i])];
      next_free = std::max(next_free, dense + 1);
    }
  }
  result.centroids.resize(next_free);
  return result;
}

ClusterLabels kmeans(const PointCloud& cloud, int k, int max_iters, Rng& rng) {
  return kmeans_detailed(cloud, k, max_iters, rng).labels;
}

ClusterLabels dbscan(const PointCloud& cloud, double eps, int min_pts) {
  if (!(eps > 0.0)) throw Error(Errc::InvalidArgument, "dbscan: eps must be > 0");
  if (min_pts < 1) throw Error(Errc::InvalidArgument, "dbscan: min_pts must be >= 1");
  const std::size_t n = cloud.size();
  constexpr int kUnvisited = -2;
  ClusterLabels labels(n, kUnvisited);
  if (n == 0) return labels;

  const RadiusGrid grid(cloud.points, eps);
  const auto min_count = static_cast<std::size_t>(min_pts);
  std::vector<std::size_t> nbrs, nbrs2;
  std::deque<std::size_t> queue;
  int cluster = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (labels[i] != kUnvisited) continue;
    grid.query(i, nbrs);
    if (nbrs.size() < min_count) {
      labels[i] = kNoise;
      continue;
    }
    labels[i] = cluster;
    queue.assign(nbrs.begin(), nbrs.end());
    while (!queue.empty()) {
      const std::size_t q = queue.front();
      queue.pop_front();
      if (labels[q] == kNoise) labels[q] = cluster;  // border point
      if (labels[q] != kUnvisited) continue;
      labels[q] = cluster;
      grid.query(q, nbrs2);
      if (nbrs2.size() >= min_count) queue.insert(queue.end(), nbrs2.begin(), nbrs2.end());
    }
    ++cluster;
  }
  return labels;
}

CloudSegScores cloud_seg_metrics(const ClusterLabels& pred, const ClusterLabels& gt, double iou_threshold) {
  if (pred.size() != gt.size())
    throw Error(Errc::DimensionMismatch, "cloud_seg_metrics: prediction and ground truth index different clouds");
  int n_pred = 0, n_gt = 0;
  for (int l : pred) n_pred = std::max(n_pred, l + 1);
  for (int l : gt) n_gt = std::max(n_gt, l + 1);

  std::vector<std::size_t> pred_size(static_cast<std::size_t>(n_pred), 0), gt_size(static_cast<std::size_t>(n_gt), 0);
  std::vector<std::vector<std::size_t>> inter(static_cast<std::size_t>(n_pred),
                                              std::vector<std::size_t>(static_cast<std::size_t>(n_gt), 0));
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (pred[i] >= 0) ++pred_size[static_cast<std::size_t>(pred[i])];
    if (gt[i] >= 0) ++gt_size[static_cast<std::size_t>(gt[i])];
    if (pred[i] >= 0 && gt[i] >= 0) ++inter[static_cast<std::size_t>(pred[i])][static_cast<std::size_t>(gt[i])];
  }
  // Ids may be sparse; only non-empty sets count as instances.
  std::vector<std::size_t> preds, gts;
  for (std::size_t p = 0; p < pred_size.size(); ++p)
    if (pred_size[p] > 0) preds.push_back(p);
  for (std::size_t g = 0; g < gt_size.size(); ++g)
    if (gt_size[g] > 0) gts.push_back(g);
  if (gts.empty()) throw Error(Errc::EmptyGroundTruth, "cloud_seg_metrics: ground truth has no instances");

  CloudSegScores scores;
  scores.n_pred = preds.size();
  scores.n_gt = gts.size();
  std::size_t largest = 0;
  for (std::size_t p : preds) largest = std::max(largest, pred_size[p]);
  std::vector<double> conf(preds.size());
  std::vector<std::vector<double>> table(preds.size(), std::vector<double>(gts.size(), 0.0));
  for (std::size_t a = 0; a < preds.size(); ++a) {
    conf[a] = static_cast<double>(pred_size[preds[a]]) / static_cast<double>(largest);
    for (std::size_t b = 0; b < gts.size(); ++b) {
      const std::size_t in = inter[preds[a]][gts[b]];
      const std::size_t un = pred_size[preds[a]] + gt_size[gts[b]] - in;
      table[a][b] = un == 0 ? 0.0 : static_cast<double>(in) / static_cast<double>(un);
    }
  }
  const auto match = greedy_match(conf, table, iou_threshold);
  scores.matched = match.true_positives();

  std::vector<std::size_t> order(preds.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return conf[a] > conf[b]; });
  std::vector<ScoredHit> ranked;
  for (std::size_t a : order) ranked.push_back(ScoredHit{conf[a], match.det_to_gt[a] >= 0});
  scores.ap = interpolated_ap(ranked, gts.size());
  scores.ar = 100.0 * static_cast<double>(scores.matched) / static_cast<double>(gts.size());
  scores.f1 = f1(scores.ap, scores.ar);
  return scores;
}

void write_xyz(const std::filesystem::path& path, const PointCloud& cloud, const ClusterLabels* labels) {
  if (labels && labels->size() != cloud.size())
    throw Error(Errc::DimensionMismatch, "write_xyz: label count differs from point count");
  std::ofstream os(path);
  if (!os) throw Error(Errc::IoError, "cannot write '" + path.string() + "'");
  char line[160];
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto& p = cloud.points[i];
    int len = std::snprintf(line, sizeof line, "%.6f %.6f %.6f", p.x(), p.y(), p.z());
    os.write(line, len);
    if (cloud.pixel_ref) os << ' ' << (*cloud.pixel_ref)[i].u << ' ' << (*cloud.pixel_ref)[i].v;
    if (labels) os << ' ' << (*labels)[i];
    os << '\n';
  }
  if (!os) throw Error(Errc::IoError, "write failed for '" + path.string() + "'");
}

std::pair<PointCloud, std::optional<ClusterLabels>> read_xyz(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw Error(Errc::IoError, "cannot read '" + path.string() + "'");
  PointCloud cloud;
  std::optional<ClusterLabels> labels;
  std::string line;
  std::size_t columns = 0;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    std::vector<double> v;
    double x = 0.0;
    while (ss >> x) v.push_back(x);
    if (columns == 0) {
      columns = v.size();
      if (columns < 3 || columns > 6)
        throw Error(Errc::ParseError, path.string() + ":" + std::to_string(lineno) + ": expected 3-6 columns");
      if (columns >= 5) cloud.pixel_ref.emplace();
      if (columns == 4 || columns == 6) labels.emplace();
    }
    if (v.size() != columns)
      throw Error(Errc::ParseError, path.string() + ":" + std::to_string(lineno) + ": inconsistent column count");
    cloud.points.emplace_back(v[0], v[1], v[2]);
    if (columns >= 5) cloud.pixel_ref->push_back(PixelRef{static_cast<int>(v[3]), static_cast<int>(v[4])});
    if (labels) labels->push_back(static_cast<int>(v[columns - 1]));
  }
  return {std::move(cloud), std::move(labels)};
}

}  // namespace fruitsynth
