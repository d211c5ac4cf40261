// optical_generator.hpp — internal: assembly of the block optical-cycle generator

#pragma once

#include "nvdac/dynamics.hpp"

namespace nvdac::detail {

// Inputs describing the ground block in whatever basis it is represented.
struct GroundBlock {
    CMatrix hamiltonian;            // 9x9, Hz, in the working basis
    std::vector<Collapse> noise;    // 9x9 operators in the working basis
    CMatrix to_product;             // working basis -> product basis (unitary)
    RMatrix static_mask;            // elements exchanged with the excited / singlet blocks
};

// Generator acting on [vec(rho_GG); vec(rho_EE); vec(rho_SS)].
CMatrix optical_generator(const OpticalModel& model, const NVParams& p, const FieldVector& b,
                          const GroundBlock& ground, bool laser_on);

// Ground block in the lab product basis, no frame.
GroundBlock lab_ground_block(const NVParams& p, const FieldVector& b, const NoiseModel& noise);

} // namespace nvdac::detail
