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

#pragma once

// State and channel algebra on atom (4 levels) x photon register 1 (3 modes)
// x photon register 2 (3 modes).
//
// Basis ordering is atom-major: index = atom * 9 + p1 * 3 + p2, with
// atom in {G, R1, R2, D} and photon modes in {Vac, E, L}.

#include <array>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace timebin {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

enum class AtomLevel : std::uint8_t { G = 0, R1 = 1, R2 = 2, D = 3 };
enum class PhotonMode : std::uint8_t { Vac = 0, E = 1, L = 2 };
enum class Register : std::uint8_t { One = 1, Two = 2 };

inline constexpr int kAtomDim = 4;
inline constexpr int kModeDim = 3;
inline constexpr int kJointDim = kAtomDim * kModeDim * kModeDim;

inline constexpr double kNormTolerance = 1e-6;
inline constexpr double kTraceTolerance = 1e-10;
inline constexpr double kHermitianTolerance = 1e-10;
inline constexpr double kEigenvalueFloor = -1e-9;
inline constexpr double kCompletenessTolerance = 1e-10;

/// Subsystems of the joint space, usable as a bit set.
enum class Subsystem : std::uint8_t { None = 0, Atom = 1, Photon1 = 2, Photon2 = 4 };

constexpr Subsystem operator|(Subsystem a, Subsystem b) {
    return static_cast<Subsystem>(static_cast<std::uint8_t>(a) | static_cast<std::uint8_t>(b));
}
constexpr bool contains(Subsystem set, Subsystem s) {
    return (static_cast<std::uint8_t>(set) & static_cast<std::uint8_t>(s)) != 0;
}

constexpr int basis_index(AtomLevel atom, PhotonMode p1, PhotonMode p2) {
    return static_cast<int>(atom) * kModeDim * kModeDim + static_cast<int>(p1) * kModeDim +
           static_cast<int>(p2);
}

struct BasisLabel {
    AtomLevel atom;
    PhotonMode p1;
    PhotonMode p2;
};

/// Inverse of basis_index.
constexpr BasisLabel basis_label(int index) {
    return {static_cast<AtomLevel>(index / 9), static_cast<PhotonMode>((index / 3) % 3),
            static_cast<PhotonMode>(index % 3)};
}

/// Normalized state vector on the 36-dimensional joint space.
class PureState {
  public:
    /// Throws InvalidStateError if the norm deviates from 1 by more than 1e-6.
    explicit PureState(Vector amplitudes);

    static PureState basis(AtomLevel atom, PhotonMode p1, PhotonMode p2);

    /// Normalized superposition sum_k c_k |label_k>.
    static PureState superposition(std::initializer_list<std::pair<cplx, BasisLabel>> terms);

    const Vector& amplitudes() const { return amps_; }
    cplx amplitude(AtomLevel atom, PhotonMode p1, PhotonMode p2) const {
        return amps_(basis_index(atom, p1, p2));
    }

  private:
    Vector amps_;
};

/// Trace-one positive operator. The joint operator has dims {4, 3, 3};
/// reduced operators from partial_trace carry the kept subsystem dims.
class DensityOperator {
  public:
    /// Validates Hermiticity, unit trace, and the eigenvalue floor.
    explicit DensityOperator(Matrix m, std::vector<int> dims = {kAtomDim, kModeDim, kModeDim});

    /// Skips validation; for results of operations that preserve validity.
    static DensityOperator unchecked(Matrix m, std::vector<int> dims = {kAtomDim, kModeDim, kModeDim});

    static DensityOperator maximally_mixed();

    const Matrix& matrix() const { return m_; }
    const std::vector<int>& dims() const { return dims_; }
    int dim() const { return static_cast<int>(m_.rows()); }

    cplx operator()(int r, int c) const { return m_(r, c); }
    double trace() const { return m_.trace().real(); }
    double purity() const;
    double min_eigenvalue() const;
    double population(AtomLevel atom, PhotonMode p1, PhotonMode p2) const {
        const int i = basis_index(atom, p1, p2);
        return m_(i, i).real();
    }

    /// Throws InvalidStateError when any invariant is violated.
    void validate() const;

  private:
    DensityOperator(Matrix m, std::vector<int> dims, bool check);

    Matrix m_;
    std::vector<int> dims_;
};

/// Kraus representation {K_i} of a channel on the joint space.
class KrausChannel {
  public:
    /// Throws InvalidChannelError when sum K_i^dag K_i deviates from identity.
    explicit KrausChannel(std::vector<Matrix> ops);

    static KrausChannel identity(int dim = kJointDim);
    static KrausChannel unitary(Matrix u);

    const std::vector<Matrix>& operators() const { return ops_; }
    int dim() const { return static_cast<int>(ops_.front().rows()); }

    /// Kraus set of "this, then next".
    KrausChannel then(const KrausChannel& next) const;

    /// Largest entry of |sum K^dag K - I|.
    double completeness_error() const;

  private:
    std::vector<Matrix> ops_;
};

DensityOperator pure_to_density(const PureState& psi);

DensityOperator apply_channel(const DensityOperator& rho, const KrausChannel& ch);

/// <psi|rho|psi>, clamped into [0, 1].
double state_fidelity(const DensityOperator& rho, const PureState& psi);

/// Reduced operator on `keep`. Throws std::invalid_argument for an empty set
/// or when rho is not a joint operator.
DensityOperator partial_trace(const DensityOperator& rho, Subsystem keep);

/// Embeds a single-subsystem operator as op (x) identity on the joint space.
Matrix embed_atom(const Matrix& atom_op);
Matrix embed_register(const Matrix& mode_op, Register reg);

/// Full dephasing between two atomic levels: coherences between them vanish.
KrausChannel atomic_dephasing(AtomLevel a, AtomLevel b, double strength = 1.0);

/// Two-qubit depolarizing channel on the qubit pair {R1,R2} x {E,L}
/// (register `reg`), identity outside it. States supported on that pair map
/// to p * rho + (1 - p) * I/4.
KrausChannel depolarizing_atom_photon(double p, Register reg = Register::One);

}  // namespace timebin
