// Copyright 2026 The timebin Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "timebin/hilbert.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "timebin/errors.hpp"

namespace timebin {

namespace {

int product(const std::vector<int>& dims) {
    int n = 1;
    for (int d : dims) n *= d;
    return n;
}

}  // namespace

PureState::PureState(Vector amplitudes) : amps_(std::move(amplitudes)) {
    if (amps_.size() != kJointDim) {
        throw InvalidStateError("PureState needs 36 amplitudes, got " + std::to_string(amps_.size()));
    }
    const double norm = amps_.norm();
    if (std::abs(norm - 1.0) > kNormTolerance) {
        std::ostringstream msg;
        msg << "PureState is not normalized (norm " << norm << ")";
        throw InvalidStateError(msg.str());
    }
}

PureState PureState::basis(AtomLevel atom, PhotonMode p1, PhotonMode p2) {
    Vector v = Vector::Zero(kJointDim);
    v(basis_index(atom, p1, p2)) = 1.0;
    return PureState(std::move(v));
}

PureState PureState::superposition(std::initializer_list<std::pair<cplx, BasisLabel>> terms) {
    Vector v = Vector::Zero(kJointDim);
    for (const auto& [c, label] : terms) v(basis_index(label.atom, label.p1, label.p2)) += c;
    const double n = v.norm();
    if (n == 0.0) throw InvalidStateError("superposition of zero vectors");
    return PureState(v / n);
}

DensityOperator::DensityOperator(Matrix m, std::vector<int> dims) : DensityOperator(std::move(m), std::move(dims), true) {}

DensityOperator::DensityOperator(Matrix m, std::vector<int> dims, bool check)
    : m_(std::move(m)), dims_(std::move(dims)) {
    if (m_.rows() != m_.cols() || m_.rows() != product(dims_)) {
        throw InvalidStateError("density matrix shape does not match its subsystem dims");
    }
    if (check) validate();
}

DensityOperator DensityOperator::unchecked(Matrix m, std::vector<int> dims) {
    return DensityOperator(std::move(m), std::move(dims), false);
}

DensityOperator DensityOperator::maximally_mixed() {
    return DensityOperator(Matrix::Identity(kJointDim, kJointDim) / double(kJointDim));
}

double DensityOperator::purity() const { return (m_ * m_).trace().real(); }

double DensityOperator::min_eigenvalue() const {
    Eigen::SelfAdjointEigenSolver<Matrix> es(m_, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

void DensityOperator::validate() const {
    const double herm = (m_ - m_.adjoint()).cwiseAbs().maxCoeff();
    if (herm > kHermitianTolerance) {
        throw InvalidStateError("density matrix is not Hermitian (deviation " + std::to_string(herm) + ")");
    }
    const cplx tr = m_.trace();
    if (std::abs(tr - 1.0) > kTraceTolerance) {
        throw InvalidStateError("density matrix trace is " + std::to_string(tr.real()));
    }
    const double lo = min_eigenvalue();
    if (lo < kEigenvalueFloor) {
        throw InvalidStateError("density matrix has negative eigenvalue " + std::to_string(lo));
    }
}

KrausChannel::KrausChannel(std::vector<Matrix> ops) : ops_(std::move(ops)) {
    if (ops_.empty()) throw InvalidChannelError("Kraus channel needs at least one operator");
    const auto n = ops_.front().rows();
    for (const auto& k : ops_) {
        if (k.rows() != n || k.cols() != n) throw InvalidChannelError("Kraus operators must be square and equal-sized");
    }
    const double err = completeness_error();
    if (err > kCompletenessTolerance) {
        throw InvalidChannelError("Kraus set is not complete (deviation " + std::to_string(err) + ")");
    }
}

KrausChannel KrausChannel::identity(int dim) { return KrausChannel({Matrix::Identity(dim, dim)}); }

KrausChannel KrausChannel::unitary(Matrix u) { return KrausChannel({std::move(u)}); }

double KrausChannel::completeness_error() const {
    const auto n = ops_.front().rows();
    Matrix sum = Matrix::Zero(n, n);
    for (const auto& k : ops_) sum.noalias() += k.adjoint() * k;
    return (sum - Matrix::Identity(n, n)).cwiseAbs().maxCoeff();
}

KrausChannel KrausChannel::then(const KrausChannel& next) const {
    std::vector<Matrix> out;
    out.reserve(ops_.size() * next.ops_.size());
    for (const auto& b : next.ops_) {
        for (const auto& a : ops_) out.emplace_back(b * a);
    }
    return KrausChannel(std::move(out));
}

DensityOperator pure_to_density(const PureState& psi) {
    const Vector& v = psi.amplitudes();
    return DensityOperator(v * v.adjoint());
}

DensityOperator apply_channel(const DensityOperator& rho, const KrausChannel& ch) {
    if (ch.dim() != rho.dim()) throw InvalidChannelError("channel dimension does not match state");
    // Constructed channels are complete by construction; re-check is cheap at this size.
    if (ch.completeness_error() > kCompletenessTolerance) throw InvalidChannelError("Kraus set is not complete");
    Matrix out = Matrix::Zero(rho.dim(), rho.dim());
    for (const auto& k : ch.operators()) out.noalias() += k * rho.matrix() * k.adjoint();
    // Re-symmetrize to keep round-off from accumulating over long pipelines.
    out = 0.5 * (out + out.adjoint()).eval();
    return DensityOperator::unchecked(std::move(out), rho.dims());
}

double state_fidelity(const DensityOperator& rho, const PureState& psi) {
    if (rho.dim() != kJointDim) throw std::invalid_argument("state_fidelity needs a joint density operator");
    const Vector& v = psi.amplitudes();
    const double f = (v.adjoint() * rho.matrix() * v)(0, 0).real();
    return std::clamp(f, 0.0, 1.0);
}

DensityOperator partial_trace(const DensityOperator& rho, Subsystem keep) {
    if (keep == Subsystem::None) throw std::invalid_argument("partial_trace: keep set is empty");
    if (rho.dims().size() != 3 || rho.dim() != kJointDim) {
        throw std::invalid_argument("partial_trace expects a joint atom x photon1 x photon2 operator");
    }
    const std::array<int, 3> dims = {kAtomDim, kModeDim, kModeDim};
    const std::array<bool, 3> kept = {contains(keep, Subsystem::Atom), contains(keep, Subsystem::Photon1),
                                      contains(keep, Subsystem::Photon2)};
    std::vector<int> out_dims;
    for (int s = 0; s < 3; ++s) {
        if (kept[s]) out_dims.push_back(dims[s]);
    }
    const int n_out = product(out_dims);

    auto reduced_index = [&](const std::array<int, 3>& idx) {
        int r = 0;
        for (int s = 0; s < 3; ++s) {
            if (kept[s]) r = r * dims[s] + idx[s];
        }
        return r;
    };

    Matrix out = Matrix::Zero(n_out, n_out);
    const Matrix& m = rho.matrix();
    for (int i = 0; i < kJointDim; ++i) {
        const std::array<int, 3> a = {i / 9, (i / 3) % 3, i % 3};
        for (int j = 0; j < kJointDim; ++j) {
            const std::array<int, 3> b = {j / 9, (j / 3) % 3, j % 3};
            bool traced_match = true;
            for (int s = 0; s < 3; ++s) {
                if (!kept[s] && a[s] != b[s]) {
                    traced_match = false;
                    break;
                }
            }
            if (traced_match) out(reduced_index(a), reduced_index(b)) += m(i, j);
        }
    }
    return DensityOperator::unchecked(std::move(out), std::move(out_dims));
}

Matrix embed_atom(const Matrix& atom_op) {
    if (atom_op.rows() != kAtomDim || atom_op.cols() != kAtomDim) throw std::invalid_argument("atom operator must be 4x4");
    Matrix out = Matrix::Zero(kJointDim, kJointDim);
    for (int a = 0; a < kAtomDim; ++a) {
        for (int b = 0; b < kAtomDim; ++b) {
            if (atom_op(a, b) == cplx(0)) continue;
            for (int rest = 0; rest < 9; ++rest) out(a * 9 + rest, b * 9 + rest) = atom_op(a, b);
        }
    }
    return out;
}

Matrix embed_register(const Matrix& mode_op, Register reg) {
    if (mode_op.rows() != kModeDim || mode_op.cols() != kModeDim) throw std::invalid_argument("mode operator must be 3x3");
    Matrix out = Matrix::Zero(kJointDim, kJointDim);
    for (int i = 0; i < kJointDim; ++i) {
        const BasisLabel li = basis_label(i);
        for (int j = 0; j < kJointDim; ++j) {
            const BasisLabel lj = basis_label(j);
            if (li.atom != lj.atom) continue;
            if (reg == Register::One) {
                if (li.p2 != lj.p2) continue;
                out(i, j) = mode_op(int(li.p1), int(lj.p1));
            } else {
                if (li.p1 != lj.p1) continue;
                out(i, j) = mode_op(int(li.p2), int(lj.p2));
            }
        }
    }
    return out;
}

KrausChannel atomic_dephasing(AtomLevel a, AtomLevel b, double strength) {
    if (a == b) throw std::invalid_argument("atomic_dephasing needs two distinct levels");
    if (!(strength >= 0.0 && strength <= 1.0)) throw std::invalid_argument("dephasing strength must be in [0,1]");
    // Random sign flip on |b>: <a|rho|b> scales by (1 - strength).
    Matrix z = Matrix::Identity(kAtomDim, kAtomDim);
    z(int(b), int(b)) = -1.0;
    return KrausChannel({std::sqrt(1.0 - strength / 2) * Matrix::Identity(kJointDim, kJointDim),
                         std::sqrt(strength / 2) * embed_atom(z)});
}

KrausChannel depolarizing_atom_photon(double p, Register reg) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("depolarizing parameter must be in [0,1]");
    // Pauli matrices on the qubit {R1,R2} of the atom and {E,L} of the register,
    // acting as identity on the remaining levels/modes.
    auto atom_pauli = [](int k) {
        Matrix m = Matrix::Identity(kAtomDim, kAtomDim);
        const int r1 = int(AtomLevel::R1), r2 = int(AtomLevel::R2);
        m(r1, r1) = m(r2, r2) = 0;
        switch (k) {
            case 0: m(r1, r1) = m(r2, r2) = 1; break;
            case 1: m(r1, r2) = m(r2, r1) = 1; break;
            case 2: m(r1, r2) = cplx(0, -1); m(r2, r1) = cplx(0, 1); break;
            case 3: m(r1, r1) = 1; m(r2, r2) = -1; break;
        }
        return m;
    };
    auto mode_pauli = [](int k) {
        Matrix m = Matrix::Identity(kModeDim, kModeDim);
        const int e = int(PhotonMode::E), l = int(PhotonMode::L);
        m(e, e) = m(l, l) = 0;
        switch (k) {
            case 0: m(e, e) = m(l, l) = 1; break;
            case 1: m(e, l) = m(l, e) = 1; break;
            case 2: m(e, l) = cplx(0, -1); m(l, e) = cplx(0, 1); break;
            case 3: m(e, e) = 1; m(l, l) = -1; break;
        }
        return m;
    };
    std::vector<Matrix> ops;
    ops.reserve(16);
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) {
            const double w = (i == 0 && j == 0) ? p + (1.0 - p) / 16.0 : (1.0 - p) / 16.0;
            ops.emplace_back(std::sqrt(w) * embed_atom(atom_pauli(i)) * embed_register(mode_pauli(j), reg));
        }
    }
    return KrausChannel(std::move(ops));
}

}  // namespace timebin
