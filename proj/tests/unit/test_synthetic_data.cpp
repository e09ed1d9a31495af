#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>
#include <numeric>

#include "pdl/dataset_io.hpp"
#include "pdl/error.hpp"
#include "pdl/synthetic.hpp"
#include "test_support.hpp"

using namespace pdl_test;
using synthetic::Label;

namespace {

const synthetic::Dataset& default_dataset() {
  static const synthetic::Dataset ds = synthetic::generate(synthetic::default_domains(), synthetic::GenerateOptions{});
  return ds;
}

// Per-image means of the six channels.
std::vector<double> channel_means(const synthetic::Sample& s, std::size_t hw) {
  std::vector<double> m(6, 0.0);
  for (std::size_t c = 0; c < 6; ++c) {
    for (std::size_t k = 0; k < hw; ++k) m[c] += s.image[c * hw + k];
    m[c] /= static_cast<double>(hw);
  }
  return m;
}

}  // namespace

TEST(Generate, DefaultCountsAndLayout) {
  const auto& ds = default_dataset();
  EXPECT_EQ(ds.samples.size(), 800u);
  EXPECT_EQ(ds.domains.size(), 4u);
  for (const auto& s : ds.samples) {
    ASSERT_EQ(s.image.size(), 6u * 32 * 32);
    ASSERT_EQ(s.depth.size(), 16u * 16);
  }
}

TEST(Generate, DepthTargets) {
  const auto& ds = default_dataset();
  for (const auto& s : ds.samples) {
    const double sum = std::accumulate(s.depth.begin(), s.depth.end(), 0.0);
    if (s.label == Label::Spoof) {
      EXPECT_EQ(sum, 0.0);
      continue;
    }
    const double mx = *std::max_element(s.depth.begin(), s.depth.end());
    EXPECT_GT(mx, 0.0);
    for (double v : s.depth) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
    // Corners fall off to zero; the dome peaks at its centre.
    EXPECT_EQ(s.depth[0], 0.0);
    EXPECT_EQ(s.depth[255], 0.0);
    EXPECT_GT(mx, s.depth[0]);
  }
}

TEST(Generate, BitIdenticalForSeed) {
  const auto opts = small_generate_options(6, 42);
  const auto a = synthetic::generate(synthetic::default_domains(), opts);
  const auto b = synthetic::generate(synthetic::default_domains(), opts);
  ASSERT_EQ(a.samples.size(), b.samples.size());
  for (std::size_t i = 0; i < a.samples.size(); ++i) {
    EXPECT_EQ(a.samples[i].image, b.samples[i].image);
    EXPECT_EQ(a.samples[i].depth, b.samples[i].depth);
    EXPECT_EQ(a.samples[i].sample_id, b.samples[i].sample_id);
  }
  auto threaded = opts;
  threaded.threads = 3;
  const auto c = synthetic::generate(synthetic::default_domains(), threaded);
  for (std::size_t i = 0; i < a.samples.size(); ++i) EXPECT_EQ(a.samples[i].image, c.samples[i].image);
  auto other = opts;
  other.seed = 43;
  EXPECT_NE(synthetic::generate(synthetic::default_domains(), other).samples[0].image, a.samples[0].image);
}

TEST(Generate, HsvChannelsAreTheTransformOfRgb) {
  const auto ds = synthetic::generate(synthetic::default_domains(), small_generate_options(4));
  const std::size_t hw = 64;
  for (const auto& s : ds.samples) {
    for (std::size_t k = 0; k < hw; ++k) {
      double h, sat, v;
      synthetic::rgb_to_hsv(s.image[k], s.image[hw + k], s.image[2 * hw + k], h, sat, v);
      ASSERT_EQ(h, s.image[3 * hw + k]);
      ASSERT_EQ(sat, s.image[4 * hw + k]);
      ASSERT_EQ(v, s.image[5 * hw + k]);
    }
  }
}

TEST(Generate, Preconditions) {
  const auto domains = synthetic::default_domains();
  auto o = small_generate_options(1);
  EXPECT_THROW(synthetic::generate(domains, o), ValidationError);
  o = small_generate_options(4);
  o.image_size = 7;
  EXPECT_THROW(synthetic::generate(domains, o), ValidationError);
  o = small_generate_options(4);
  o.live_fraction = 1.0;
  EXPECT_THROW(synthetic::generate(domains, o), ValidationError);
}

TEST(Generate, ClassBalancePerDomain) {
  const auto& ds = default_dataset();
  const double n = static_cast<double>(ds.options.per_domain);
  for (const auto& d : ds.domains) {
    double live = 0.0;
    for (const auto& s : ds.samples) {
      if (s.true_domain == d.id && s.label == Label::Live) live += 1.0;
    }
    EXPECT_LE(std::abs(live / n - ds.options.live_fraction), 2.0 / std::sqrt(n)) << "domain " << d.id;
  }
}

TEST(Generate, DomainsSeparableByPixelStatistics) {
  const auto& ds = default_dataset();
  const std::size_t hw = 32 * 32;
  std::vector<std::vector<double>> means;
  for (const auto& s : ds.samples) means.push_back(channel_means(s, hw));
  // Even samples fit the centroids, odd samples are scored.
  std::vector<std::vector<double>> centroid(4, std::vector<double>(6, 0.0));
  std::vector<double> count(4, 0.0);
  for (std::size_t i = 0; i < means.size(); i += 2) {
    const auto d = static_cast<std::size_t>(ds.samples[i].true_domain);
    for (std::size_t c = 0; c < 6; ++c) centroid[d][c] += means[i][c];
    count[d] += 1.0;
  }
  for (std::size_t d = 0; d < 4; ++d)
    for (double& v : centroid[d]) v /= count[d];
  std::size_t right = 0, total = 0;
  for (std::size_t i = 1; i < means.size(); i += 2, ++total) {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t d = 0; d < 4; ++d) {
      double dist = 0.0;
      for (std::size_t c = 0; c < 6; ++c) dist += std::pow(means[i][c] - centroid[d][c], 2);
      if (dist < best_d) best_d = dist, best = d;
    }
    right += best == static_cast<std::size_t>(ds.samples[i].true_domain) ? 1 : 0;
  }
  EXPECT_GE(static_cast<double>(right) / static_cast<double>(total), 0.90);
}

TEST(Generate, LiveSpoofNotLinearInChannelMeans) {
  // Least-squares linear probe on the six channel means (plus bias), scored on held-out samples.
  const auto& ds = default_dataset();
  const std::size_t hw = 32 * 32;
  const std::size_t n = ds.samples.size();
  Eigen::MatrixXd X(n / 2, 7), Xt(n - n / 2, 7);
  Eigen::VectorXd y(n / 2), yt(n - n / 2);
  for (std::size_t i = 0; i < n; ++i) {
    const auto m = channel_means(ds.samples[i], hw);
    const double target = synthetic::class_target(ds.samples[i].label) * 2.0 - 1.0;
    auto& M = i % 2 == 0 ? X : Xt;
    auto& v = i % 2 == 0 ? y : yt;
    const auto r = static_cast<Eigen::Index>(i / 2);
    for (std::size_t c = 0; c < 6; ++c) M(r, static_cast<Eigen::Index>(c)) = m[c];
    M(r, 6) = 1.0;
    v(r) = target;
  }
  const Eigen::VectorXd w = X.colPivHouseholderQr().solve(y);
  const Eigen::VectorXd pred = Xt * w;
  double right = 0.0;
  for (Eigen::Index i = 0; i < pred.size(); ++i) right += (pred(i) > 0.0) == (yt(i) > 0.0) ? 1.0 : 0.0;
  EXPECT_LT(right / static_cast<double>(pred.size()), 0.85);
}

TEST(Hsv, Examples) {
  double h, s, v;
  synthetic::rgb_to_hsv(1.0, 0.0, 0.0, h, s, v);
  EXPECT_EQ(h, 0.0);
  EXPECT_EQ(s, 1.0);
  EXPECT_EQ(v, 1.0);
  synthetic::rgb_to_hsv(0.5, 0.5, 0.5, h, s, v);
  EXPECT_EQ(h, 0.0);
  EXPECT_EQ(s, 0.0);
  EXPECT_EQ(v, 0.5);
}

TEST(Hsv, InverseOnRandomPixels) {
  Rng rng(1);
  const auto px = uniform_values(3000, rng, 0.0, 1.0);
  for (std::size_t i = 0; i < 1000; ++i) {
    double h, s, v, r, g, b;
    synthetic::rgb_to_hsv(px[3 * i], px[3 * i + 1], px[3 * i + 2], h, s, v);
    synthetic::hsv_to_rgb(h, s, v, r, g, b);
    EXPECT_NEAR(r, px[3 * i], 1e-6);
    EXPECT_NEAR(g, px[3 * i + 1], 1e-6);
    EXPECT_NEAR(b, px[3 * i + 2], 1e-6);
  }
}

TEST(Hsv, TensorFormClampsAndCounts) {
  const Tensor rgb = Tensor::from({3, 1, 2}, {1.5, 0.2, 0.0, 0.2, -0.1, 0.2});
  std::size_t clamped = 0;
  const Tensor hsv = synthetic::rgb_to_hsv(rgb, &clamped);
  EXPECT_EQ(clamped, 2u);
  EXPECT_EQ(hsv.shape(), (Shape{3, 1, 2}));
  EXPECT_EQ(hsv.at(4), 1.0);  // V of the clamped red pixel
  EXPECT_THROW(synthetic::rgb_to_hsv(Tensor::zeros({2, 2, 2})), ShapeError);
}

TEST(Split, CountsAndPartition) {
  const auto ds = synthetic::generate(synthetic::default_domains(), small_generate_options(100));
  const auto split = synthetic::split_leave_one_domain_out(ds, 2);
  EXPECT_EQ(split.train.size(), 300u);
  EXPECT_EQ(split.test.size(), 100u);
  EXPECT_EQ(split.train_domain_truth.size(), 300u);
  std::set<std::uint64_t> train_ids, test_ids;
  for (const auto& r : split.train) train_ids.insert(r.sample_id);
  for (const auto& s : split.test) {
    EXPECT_EQ(s.true_domain, 2);
    test_ids.insert(s.sample_id);
  }
  for (int d : split.train_domain_truth) EXPECT_NE(d, 2);
  std::set<std::uint64_t> all;
  for (const auto& s : ds.samples) all.insert(s.sample_id);
  std::set<std::uint64_t> both;
  std::set_intersection(train_ids.begin(), train_ids.end(), test_ids.begin(), test_ids.end(),
                        std::inserter(both, both.begin()));
  EXPECT_TRUE(both.empty());
  train_ids.insert(test_ids.begin(), test_ids.end());
  EXPECT_EQ(train_ids, all);
  EXPECT_THROW(synthetic::split_leave_one_domain_out(ds, 9), ValidationError);
}

template <typename T>
concept HasTrueDomain = requires(T t) { t.true_domain; };

TEST(Split, TrainerRecordsHideDomain) {
  static_assert(HasTrueDomain<synthetic::Sample>);
  static_assert(!HasTrueDomain<synthetic::TrainRecord>);
  SUCCEED();
}

TEST(DatasetIo, RoundTripBothLayouts) {
  const auto ds = synthetic::generate(synthetic::default_domains(), small_generate_options(4, 3));
  const auto dir = std::filesystem::temp_directory_path() / "pdl_test_dataset_io";
  std::filesystem::remove_all(dir);
  for (auto storage : {io::SampleStorage::Blob, io::SampleStorage::PerSampleFiles}) {
    const auto sub = dir / (storage == io::SampleStorage::Blob ? "blob" : "files");
    const std::string h1 = io::save_dataset(ds, sub, storage);
    const auto loaded = io::load_dataset(sub);
    ASSERT_EQ(loaded.samples.size(), ds.samples.size());
    for (std::size_t i = 0; i < ds.samples.size(); ++i) {
      EXPECT_EQ(loaded.samples[i].image, ds.samples[i].image);
      EXPECT_EQ(loaded.samples[i].depth, ds.samples[i].depth);
      EXPECT_EQ(loaded.samples[i].label, ds.samples[i].label);
      EXPECT_EQ(loaded.samples[i].true_domain, ds.samples[i].true_domain);
    }
    EXPECT_EQ(io::save_dataset(ds, sub, storage), h1);
  }
  std::filesystem::remove_all(dir);
}
