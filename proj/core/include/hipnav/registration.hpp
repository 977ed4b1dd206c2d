#pragma once

#include <cstddef>
#include <vector>

#include "hipnav/geometry.hpp"

namespace hipnav {

/// Paired observations of the same physical points in two frames.
/// `p` lives in `p_frame` (e.g. robot base), `q` in `q_frame` (e.g. optical locator).
struct Correspondences {
  std::vector<Point3> p;
  std::vector<Point3> q;
  FrameTag p_frame = FrameTag::Base;
  FrameTag q_frame = FrameTag::Cam;

  std::size_t size() const noexcept { return p.size(); }

  /// Throws SizeMismatch, InvalidArgument (n < 3, non-finite) or
  /// DegenerateConfiguration (p collinear).
  void validate() const;

  Correspondences subset(const std::vector<std::size_t>& indices) const;
};

struct RegistrationOptions {
  double beta = 2.0;            ///< per-pair residual threshold, mm (strict <)
  std::size_t max_rounds = 10;  ///< fit/reject rounds before giving up
  std::size_t min_pairs = 4;    ///< refuse to fit fewer survivors than this
};

struct RegistrationResult {
  RigidTransform transform;              ///< p_frame -> q_frame
  std::vector<double> residuals;         ///< per original pair, under the final transform
  std::vector<std::size_t> retained;     ///< original indices kept
  std::vector<std::size_t> rejected;     ///< original indices dropped, ascending
  std::size_t iterations = 0;
  double rms = 0.0;                      ///< over retained pairs
  std::vector<double> rms_history;       ///< retained rms after each round
};

/// Least-squares rigid fit q ≈ R p + T via SVD of the cross-covariance,
/// with the determinant fix for reflections.
RigidTransform kabsch(const Correspondences& c);

/// residual_i = |q_i - (R p_i + T)|.
std::vector<double> residuals(const RigidTransform& t, const Correspondences& c);

double rms(const std::vector<double>& values);

/// Fit, reject every pair whose residual is not below beta, refit, until the
/// worst retained residual is below beta. Throws RegistrationExhausted when
/// fewer than `min_pairs` survive or `max_rounds` pass without success.
RegistrationResult register_filtered(const Correspondences& c, const RegistrationOptions& options = {});

/// Pic->Cam followed by Cam->Base, giving Pic->Base.
RigidTransform chain_image_to_base(const RigidTransform& t_cam_pic, const RigidTransform& t_base_cam);

}  // namespace hipnav
