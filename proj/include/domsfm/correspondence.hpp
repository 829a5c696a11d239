#pragma once

#include <memory>
#include <random>
#include <string>

#include "domsfm/geometry.hpp"
#include "domsfm/model.hpp"

namespace domsfm {

struct NoiseConfig {
  double pixel_noise_sigma = 0.0;
  double outlier_ratio = 0.0;  // fraction of pixels replaced by uniform in-bounds pixels
  double drop_ratio = 0.0;     // independent per-match drop probability
  std::uint64_t rng_seed = 0;

  void validate() const;
};

struct MatchSet {
  std::vector<Correspondence> correspondences;
  std::string provider_name;
  double elapsed_seconds = 0.0;
  // |query keypoints| x |model points| for the descriptor matcher; the
  // speed-proxy metric that shrinks with the model.
  std::size_t candidate_comparisons = 0;
};

// Projects every model point visible in the query view (in front of the
// camera and inside image bounds) and emits it with Gaussian pixel noise,
// then drops matches independently, then replaces a fraction of pixels with
// uniform in-bounds outliers. Deterministic given noise.rng_seed.
MatchSet oracle_matches(const SfmModel& model, const Pose& query_pose,
                        const CameraIntrinsics& query_camera, const NoiseConfig& noise);

// Mutual nearest neighbour in Euclidean descriptor distance with Lowe ratio
// test. The model must carry per-point descriptors.
MatchSet descriptor_matches(const SfmModel& model,
                            const std::vector<Eigen::Vector2d>& query_keypoints,
                            const std::vector<Eigen::VectorXd>& query_descriptors,
                            double ratio_threshold = 0.8);

// Noise stages shared by the providers (noise, drop, outlier replacement, in
// that order), applied to an existing match set.
void corrupt_matches(std::vector<Correspondence>* matches, const NoiseConfig& noise,
                     const CameraIntrinsics& camera, std::mt19937_64& rng);

class CorrespondenceProvider {
 public:
  virtual ~CorrespondenceProvider() = default;
  virtual MatchSet match(const SfmModel& model, const QueryView& query) const = 0;
  virtual std::string name() const = 0;
};

// Ground-truth projections plus the configured noise model; stands in for a
// learned feature matcher.
class OracleProvider : public CorrespondenceProvider {
 public:
  explicit OracleProvider(NoiseConfig noise) : noise_(noise) { noise_.validate(); }
  MatchSet match(const SfmModel& model, const QueryView& query) const override;
  std::string name() const override { return "oracle"; }

 private:
  NoiseConfig noise_;
};

// Mutual-NN descriptor matching followed by the same noise stages.
class DescriptorNnProvider : public CorrespondenceProvider {
 public:
  DescriptorNnProvider(double ratio_threshold, NoiseConfig noise)
      : ratio_threshold_(ratio_threshold), noise_(noise) {
    noise_.validate();
  }
  MatchSet match(const SfmModel& model, const QueryView& query) const override;
  std::string name() const override { return "descriptor-nn"; }

 private:
  double ratio_threshold_;
  NoiseConfig noise_;
};

// name is "oracle" or "descriptor-nn".
std::unique_ptr<CorrespondenceProvider> make_provider(const std::string& name,
                                                      const NoiseConfig& noise,
                                                      double ratio_threshold = 0.8);

}  // namespace domsfm
