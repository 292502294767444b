#pragma once

#include <Eigen/Dense>
#include <stdexcept>

#include "immsdp/moment.hpp"
#include "immsdp/realization.hpp"

namespace immsdp::testing {

// Variable assignment matching an explicit realization: every unknown of the
// symbolic model is set to the value the realization gives its word.
inline Eigen::VectorXd assign_from_realization(const MomentModel& model,
                                               const Realization& r) {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(model.num_vars());
    for (int a = 0; a < model.scenario.nA; ++a) {
        for (int xi = 0; xi < model.scenario.nX; ++xi) {
            const MomentBlock& blk = model.blocks()[model.block_index(a, xi)];
            MatrixXcd sigma = r.block_state(a, xi);
            for (const auto& [word, affine] : blk.word_values) {
                Complex c = (sigma * r.word_operator(word)).trace();
                for (const auto& [v, coeff] : affine.terms) {
                    if (std::abs(coeff.imag()) < 1e-14)
                        x[v] = c.real() / coeff.real();
                    else
                        x[v] = c.imag() / coeff.imag();
                }
            }
        }
    }
    return x;
}

}  // namespace immsdp::testing
