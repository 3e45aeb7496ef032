#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <json.hpp>

// Truncated tensor-product Hilbert spaces for molecular qubits coupled to
// Fock-truncated motional modes. Basis ordering: qubits first (molecule index
// ascending, most significant), then modes (frequency ascending). Qubit basis
// index 0 = |e> (lower doublet component), 1 = |f> (upper).
namespace dpql {

using cd = std::complex<double>;
using VectorXcd = Eigen::VectorXcd;
using MatrixXcd = Eigen::MatrixXcd;
using SparseCd = Eigen::SparseMatrix<cd>;

struct HilbertLayout {
    int qubit_count = 0;
    std::vector<int> mode_dims;   // Fock truncation N_max+1 per mode
    int total_dim = 0;
    std::vector<int> strides;     // per factor: qubits then modes

    static HilbertLayout make(int qubits, std::vector<int> dims) {
        if (qubits < 0) throw std::invalid_argument("qubit_count must be >= 0");
        for (int d : dims)
            if (d < 2) throw std::invalid_argument("every mode_dim must be >= 2");
        HilbertLayout lay;
        lay.qubit_count = qubits;
        lay.mode_dims = std::move(dims);
        const int nfac = qubits + static_cast<int>(lay.mode_dims.size());
        lay.strides.assign(nfac, 1);
        int dim = 1;
        for (int k = nfac - 1; k >= 0; --k) {
            lay.strides[k] = dim;
            dim *= lay.factor_dim(k);
        }
        lay.total_dim = dim;
        return lay;
    }

    int mode_count() const { return static_cast<int>(mode_dims.size()); }
    int factor_count() const { return qubit_count + mode_count(); }
    int factor_dim(int k) const {
        return k < qubit_count ? 2 : mode_dims[static_cast<size_t>(k - qubit_count)];
    }
    int qubit_bit(int idx, int which) const {
        return (idx / strides[which]) % 2;
    }
    int fock_level(int idx, int mode) const {
        const int k = qubit_count + mode;
        return (idx / strides[k]) % factor_dim(k);
    }
    bool operator==(const HilbertLayout& o) const {
        return qubit_count == o.qubit_count && mode_dims == o.mode_dims;
    }
};

struct OperatorMatrix {
    HilbertLayout layout;
    SparseCd mat;

    MatrixXcd dense() const { return MatrixXcd(mat); }
};

struct StateVector {
    HilbertLayout layout;
    VectorXcd amplitudes;

    static StateVector zero(const HilbertLayout& lay) {
        StateVector s{lay, VectorXcd::Zero(lay.total_dim)};
        return s;
    }
    // basis state |bits; fock levels>
    static StateVector basis(const HilbertLayout& lay, const std::vector<int>& qubit_bits,
                             const std::vector<int>& fock) {
        if (static_cast<int>(qubit_bits.size()) != lay.qubit_count ||
            static_cast<int>(fock.size()) != lay.mode_count())
            throw std::invalid_argument("basis: wrong factor count");
        int idx = 0;
        for (int i = 0; i < lay.qubit_count; ++i) {
            if (qubit_bits[i] < 0 || qubit_bits[i] > 1) throw std::invalid_argument("basis: bad bit");
            idx += qubit_bits[i] * lay.strides[i];
        }
        for (int q = 0; q < lay.mode_count(); ++q) {
            if (fock[q] < 0 || fock[q] >= lay.mode_dims[q]) throw std::invalid_argument("basis: bad fock level");
            idx += fock[q] * lay.strides[lay.qubit_count + q];
        }
        StateVector s = zero(lay);
        s.amplitudes[idx] = 1.0;
        return s;
    }
    double norm() const { return amplitudes.norm(); }
};

struct DensityMatrix {
    HilbertLayout layout;
    MatrixXcd elements;

    static DensityMatrix from_state(const StateVector& psi) {
        return {psi.layout, psi.amplitudes * psi.amplitudes.adjoint()};
    }
    double trace_real() const { return elements.trace().real(); }
    double hermiticity_error() const {
        return (elements - elements.adjoint()).cwiseAbs().maxCoeff();
    }
    double min_eigenvalue() const {
        Eigen::SelfAdjointEigenSolver<MatrixXcd> es(elements, Eigen::EigenvaluesOnly);
        return es.eigenvalues().minCoeff();
    }
};

enum class QubitOpKind { sigma_x, sigma_z, sigma_plus, sigma_minus };
enum class ModeOpKind { a, a_dagger, number };

namespace detail {

// Embed a single-factor operator into the full space: identity elsewhere.
inline SparseCd embed_factor(const HilbertLayout& lay, int factor, const MatrixXcd& op) {
    const int d = lay.factor_dim(factor);
    if (op.rows() != d || op.cols() != d) throw std::invalid_argument("embed: dim mismatch");
    const int stride = lay.strides[factor];
    const int block = stride * d;
    std::vector<Eigen::Triplet<cd>> trip;
    trip.reserve(static_cast<size_t>(lay.total_dim) * 2);
    for (int base = 0; base < lay.total_dim; base += block)
        for (int inner = 0; inner < stride; ++inner)
            for (int r = 0; r < d; ++r)
                for (int c = 0; c < d; ++c) {
                    const cd v = op(r, c);
                    if (v != cd(0.0)) trip.emplace_back(base + inner + r * stride, base + inner + c * stride, v);
                }
    SparseCd m(lay.total_dim, lay.total_dim);
    m.setFromTriplets(trip.begin(), trip.end());
    return m;
}

} // namespace detail

inline OperatorMatrix build_qubit_op(const HilbertLayout& lay, int which, QubitOpKind kind) {
    if (which < 0 || which >= lay.qubit_count) throw std::out_of_range("build_qubit_op: qubit index");
    MatrixXcd op = MatrixXcd::Zero(2, 2);
    switch (kind) {
        case QubitOpKind::sigma_x: op(0, 1) = 1.0; op(1, 0) = 1.0; break;
        case QubitOpKind::sigma_z: op(0, 0) = -1.0; op(1, 1) = 1.0; break;
        case QubitOpKind::sigma_plus: op(1, 0) = 1.0; break;   // |f><e|
        case QubitOpKind::sigma_minus: op(0, 1) = 1.0; break;  // |e><f|
    }
    return {lay, detail::embed_factor(lay, which, op)};
}

inline OperatorMatrix build_mode_op(const HilbertLayout& lay, int which, ModeOpKind kind) {
    if (which < 0 || which >= lay.mode_count()) throw std::out_of_range("build_mode_op: mode index");
    const int d = lay.mode_dims[which];
    MatrixXcd op = MatrixXcd::Zero(d, d);
    switch (kind) {
        case ModeOpKind::a:
            for (int n = 1; n < d; ++n) op(n - 1, n) = std::sqrt(double(n));
            break;
        case ModeOpKind::a_dagger:
            for (int n = 1; n < d; ++n) op(n, n - 1) = std::sqrt(double(n));
            break;
        case ModeOpKind::number:
            for (int n = 0; n < d; ++n) op(n, n) = double(n);
            break;
    }
    return {lay, detail::embed_factor(lay, lay.qubit_count + which, op)};
}

inline OperatorMatrix identity_op(const HilbertLayout& lay) {
    SparseCd m(lay.total_dim, lay.total_dim);
    m.setIdentity();
    return {lay, m};
}

inline cd expectation(const StateVector& psi, const OperatorMatrix& op) {
    if (!(psi.layout == op.layout)) throw std::invalid_argument("expectation: layout mismatch");
    return psi.amplitudes.dot(op.mat * psi.amplitudes);
}

inline cd expectation(const DensityMatrix& rho, const OperatorMatrix& op) {
    if (!(rho.layout == op.layout)) throw std::invalid_argument("expectation: layout mismatch");
    return (op.mat * rho.elements).trace();
}

namespace detail {
inline int pattern_index_mask(const HilbertLayout& lay, const std::string& pattern,
                              int& qubit_part) {
    if (static_cast<int>(pattern.size()) != lay.qubit_count)
        throw std::invalid_argument("population: pattern length != qubit_count");
    qubit_part = 0;
    for (int i = 0; i < lay.qubit_count; ++i) {
        const char c = pattern[static_cast<size_t>(i)];
        if (c == 'f' || c == 'F') qubit_part += lay.strides[i];
        else if (c != 'e' && c != 'E') throw std::invalid_argument("population: pattern must be e/f");
    }
    return qubit_part;
}
} // namespace detail

// Probability of the molecular parity pattern, traced over all modes.
// Leftmost pattern character = molecule 1 (qubit 0).
inline double population(const StateVector& psi, const std::string& pattern) {
    int part = 0;
    detail::pattern_index_mask(psi.layout, pattern, part);
    const int mode_block = psi.layout.qubit_count > 0
                               ? psi.layout.strides[psi.layout.qubit_count - 1]
                               : psi.layout.total_dim;
    double p = 0.0;
    for (int m = 0; m < mode_block; ++m) p += std::norm(psi.amplitudes[part + m]);
    return p;
}

inline double population(const DensityMatrix& rho, const std::string& pattern) {
    int part = 0;
    detail::pattern_index_mask(rho.layout, pattern, part);
    const int mode_block = rho.layout.qubit_count > 0
                               ? rho.layout.strides[rho.layout.qubit_count - 1]
                               : rho.layout.total_dim;
    double p = 0.0;
    for (int m = 0; m < mode_block; ++m) p += rho.elements(part + m, part + m).real();
    return p;
}

// Reduced density matrix of the qubit register (modes traced out). With the
// qubits-major ordering the amplitudes reshape to a (2^K x mode_dim) matrix.
inline MatrixXcd reduced_qubit_density(const StateVector& psi) {
    const int nq = 1 << psi.layout.qubit_count;
    const int nm = psi.layout.total_dim / nq;
    Eigen::Map<const Eigen::Matrix<cd, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> m(
        psi.amplitudes.data(), nq, nm);
    return m * m.adjoint();
}

inline MatrixXcd reduced_qubit_density(const DensityMatrix& rho) {
    const int nq = 1 << rho.layout.qubit_count;
    const int nm = rho.layout.total_dim / nq;
    MatrixXcd out = MatrixXcd::Zero(nq, nq);
    for (int r = 0; r < nq; ++r)
        for (int c = 0; c < nq; ++c)
            for (int m = 0; m < nm; ++m) out(r, c) += rho.elements(r * nm + m, c * nm + m);
    return out;
}

// Population of the top `levels` Fock states of a mode (truncation monitor).
inline double top_fock_population(const StateVector& psi, int mode, int levels = 1) {
    double p = 0.0;
    for (int i = 0; i < psi.layout.total_dim; ++i)
        if (psi.layout.fock_level(i, mode) >= psi.layout.mode_dims[mode] - levels)
            p += std::norm(psi.amplitudes[i]);
    return p;
}

inline double top_fock_population(const DensityMatrix& rho, int mode, int levels = 1) {
    double p = 0.0;
    for (int i = 0; i < rho.layout.total_dim; ++i)
        if (rho.layout.fock_level(i, mode) >= rho.layout.mode_dims[mode] - levels)
            p += rho.elements(i, i).real();
    return p;
}

inline nlohmann::json layout_to_json(const HilbertLayout& lay) {
    return {{"qubit_count", lay.qubit_count}, {"mode_dims", lay.mode_dims}};
}

inline nlohmann::json state_to_json(const StateVector& psi) {
    std::vector<double> amps;
    amps.reserve(static_cast<size_t>(2 * psi.layout.total_dim));
    for (int i = 0; i < psi.layout.total_dim; ++i) {
        amps.push_back(psi.amplitudes[i].real());
        amps.push_back(psi.amplitudes[i].imag());
    }
    return {{"layout", layout_to_json(psi.layout)}, {"amplitudes", amps}};
}

inline StateVector state_from_json(const nlohmann::json& j) {
    HilbertLayout lay = HilbertLayout::make(j.at("layout").at("qubit_count").get<int>(),
                                            j.at("layout").at("mode_dims").get<std::vector<int>>());
    const auto amps = j.at("amplitudes").get<std::vector<double>>();
    if (static_cast<int>(amps.size()) != 2 * lay.total_dim)
        throw std::invalid_argument("state_from_json: amplitude count mismatch");
    StateVector s = StateVector::zero(lay);
    for (int i = 0; i < lay.total_dim; ++i) s.amplitudes[i] = cd(amps[2 * i], amps[2 * i + 1]);
    return s;
}

} // namespace dpql
