// field_inversion.hpp — magnetic field vector from ODMR line centers.
//
// The four NV orientations make (B, theta, phi) recoverable only up to the
// 48-element symmetry group of the axis set (tetrahedral rotations, mirrors and
// B -> -B). Results are reported in a canonical representative: the image with
// the smallest polar angle from axis 0 (lab z), ties broken by the smallest
// azimuth in [0, 2 pi). For an aligned field this is theta = 0 on axis 0.

#pragma once

#include "nvdac/spinops.hpp"

#include <vector>

namespace nvdac {

struct FieldFit {
    FieldVector field;              // canonical representative, lab frame
    double sigma_magnitude{0.0};    // Gauss
    double sigma_theta{0.0};        // rad
    double sigma_phi{0.0};          // rad
    int axis{0};                    // NV axis closest to the field
    bool orientation_defined{true}; // false at (near) zero field
    double rms_residual{0.0};       // Hz, symmetric nearest-line distance
};

// Symmetry images of a field (48 entries, identity first).
std::vector<FieldVector> symmetry_images(const FieldVector& b);

FieldVector canonical_field(const FieldVector& b);

// Smallest angle (rad) between `a` and any symmetry image of `b`.
double symmetric_angle(const FieldVector& a, const FieldVector& b);

// Fits (B, theta, phi) so that odmr_lines reproduces `centers_hz`. `params`
// supplies gamma_e and the hyperfine constants; its d_gs is replaced by `d_gs`.
// Throws ValidationError for fewer than 4 centers (unless every center sits at
// d_gs, the zero-field case) and when the rms residual exceeds 5 * linewidth.
FieldFit fit_field_from_odmr(const std::vector<double>& centers_hz, double d_gs, const NVParams& params = {},
                             double linewidth_hz = 1.0e6);

} // namespace nvdac
