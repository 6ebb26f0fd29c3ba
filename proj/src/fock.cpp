#include "moe/fock.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <string>

namespace moe {

namespace {

void require_cutoff(int cutoff) {
    if (cutoff < 2)
        throw InvalidDimension("Fock cutoff must be at least 2, got " + std::to_string(cutoff));
}

// Digits of a flattened multi-mode index, most significant first.
void unflatten(Eigen::Index index, int cutoff, std::vector<int>& digits) {
    for (auto it = digits.rbegin(); it != digits.rend(); ++it) {
        *it = static_cast<int>(index % cutoff);
        index /= cutoff;
    }
}

}  // namespace

Eigen::Index fock_dimension(int cutoff, int modes) {
    require_cutoff(cutoff);
    if (modes < 1) throw InvalidDimension("mode count must be positive");
    Eigen::Index d = 1;
    for (int i = 0; i < modes; ++i) {
        if (d > std::numeric_limits<Eigen::Index>::max() / cutoff)
            throw InvalidDimension("Fock dimension overflows");
        d *= cutoff;
    }
    return d;
}

FockState FockState::from_matrix(Eigen::MatrixXcd matrix, int modes, int cutoff,
                                 double trace_deficit) {
    const Eigen::Index d = fock_dimension(cutoff, modes);
    if (matrix.rows() != d || matrix.cols() != d)
        throw InvalidDimension("matrix side " + std::to_string(matrix.rows()) +
                               " does not match cutoff^modes = " + std::to_string(d));
    if ((matrix - matrix.adjoint()).cwiseAbs().maxCoeff() > 1e-12)
        throw NotAState("matrix is not Hermitian");
    if (trace_deficit < 0.0) throw NotAState("negative trace deficit");
    return FockState{modes, cutoff, std::move(matrix), trace_deficit};
}

FockState FockState::from_pure(const Eigen::VectorXcd& psi, int modes, int cutoff) {
    const Eigen::Index d = fock_dimension(cutoff, modes);
    if (psi.size() != d) throw InvalidDimension("state vector has wrong length");
    const Eigen::VectorXcd v = psi / psi.norm();
    return FockState{modes, cutoff, v * v.adjoint(), 0.0};
}

FockState FockState::vacuum(int cutoff, int modes) {
    const Eigen::Index d = fock_dimension(cutoff, modes);
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(d, d);
    m(0, 0) = 1.0;
    return FockState{modes, cutoff, std::move(m), 0.0};
}

FockState FockState::number(int k, int cutoff) {
    require_cutoff(cutoff);
    if (k < 0 || k >= cutoff) throw InvalidDimension("number state outside cutoff");
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(cutoff, cutoff);
    m(k, k) = 1.0;
    return FockState{1, cutoff, std::move(m), 0.0};
}

Eigen::MatrixXd ladder_operator(int cutoff) {
    require_cutoff(cutoff);
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(cutoff, cutoff);
    for (int k = 1; k < cutoff; ++k) a(k - 1, k) = std::sqrt(static_cast<double>(k));
    return a;
}

Eigen::VectorXd number_diagonal(int cutoff) {
    require_cutoff(cutoff);
    return Eigen::VectorXd::LinSpaced(cutoff, 0.0, cutoff - 1.0);
}

FockState thermal_state(double mean_photons, int cutoff) {
    require_cutoff(cutoff);
    if (!(mean_photons >= 0.0)) throw InvalidParameter("mean photon number must be >= 0");
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(cutoff, cutoff);
    if (mean_photons == 0.0) {
        m(0, 0) = 1.0;
        return FockState{1, cutoff, std::move(m), 0.0};
    }
    const double q = mean_photons / (mean_photons + 1.0);
    double w = 1.0 / (mean_photons + 1.0);
    for (int k = 0; k < cutoff; ++k) {
        m(k, k) = w;
        w *= q;
    }
    // Tail of the geometric series.
    const double deficit = std::exp(cutoff * std::log(q));
    return FockState{1, cutoff, std::move(m), deficit};
}

FockState renormalize(const FockState& state) {
    const double t = state.trace();
    if (!(t > 0.0)) throw NotAState("cannot renormalize a state with zero trace");
    return FockState{state.modes, state.cutoff, state.matrix / t, 0.0};
}

FockState embed(const FockState& state, int new_cutoff) {
    if (new_cutoff < state.cutoff) throw InvalidDimension("embed cannot shrink the cutoff");
    if (new_cutoff == state.cutoff) return state;
    const Eigen::Index d_new = fock_dimension(new_cutoff, state.modes);
    std::vector<Eigen::Index> map(static_cast<std::size_t>(state.dimension()));
    std::vector<int> digits(static_cast<std::size_t>(state.modes));
    for (Eigen::Index i = 0; i < state.dimension(); ++i) {
        unflatten(i, state.cutoff, digits);
        Eigen::Index j = 0;
        for (int dgt : digits) j = j * new_cutoff + dgt;
        map[static_cast<std::size_t>(i)] = j;
    }
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(d_new, d_new);
    for (Eigen::Index c = 0; c < state.dimension(); ++c)
        for (Eigen::Index r = 0; r < state.dimension(); ++r)
            m(map[r], map[c]) = state.matrix(r, c);
    return FockState{state.modes, new_cutoff, std::move(m), state.trace_deficit};
}

Eigen::VectorXd hermitian_eigenvalues(const Eigen::MatrixXcd& m) {
    const Eigen::MatrixXcd off = m - Eigen::MatrixXcd(m.diagonal().asDiagonal());
    if (off.cwiseAbs().maxCoeff() == 0.0) return m.diagonal().real();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(m, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) throw Error("Hermitian eigensolver did not converge");
    return solver.eigenvalues();
}

double von_neumann_entropy(const FockState& state) {
    const Eigen::VectorXd ev = hermitian_eigenvalues(state.matrix);
    if (ev.size() > 0 && ev.minCoeff() < -1e-8)
        throw NotAState("eigenvalue " + std::to_string(ev.minCoeff()) + " below -1e-8");
    return spectrum_entropy(ev);
}

double g_inverse(double x) {
    if (!(x >= 0.0)) throw InvalidParameter("g_inverse needs x >= 0");
    if (x == 0.0) return 0.0;
    // g(E) >= ln(E + 1) puts the root below e^x - 1 < e^x.
    double lo = 0.0;
    double hi = std::exp(x);
    while (hi - lo > 1e-12 * hi) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        (g(mid) < x ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

PhotonCount mean_photons(const FockState& state) {
    std::vector<int> digits(static_cast<std::size_t>(state.modes));
    double total = 0.0;
    for (Eigen::Index i = 0; i < state.dimension(); ++i) {
        unflatten(i, state.cutoff, digits);
        const int n = std::accumulate(digits.begin(), digits.end(), 0);
        total += n * state.matrix(i, i).real();
    }
    return PhotonCount{total, state.modes};
}

FockState tensor(const FockState& a, const FockState& b) {
    if (a.cutoff != b.cutoff) throw InvalidDimension("tensor needs equal cutoffs");
    const double deficit = a.trace_deficit + b.trace_deficit - a.trace_deficit * b.trace_deficit;
    return FockState{a.modes + b.modes, a.cutoff, kron(a.matrix, b.matrix), deficit};
}

FockState partial_trace(const FockState& joint, std::span<const int> keep) {
    const int n = joint.modes;
    const int d = joint.cutoff;
    std::vector<bool> kept(static_cast<std::size_t>(n), false);
    for (int k : keep) {
        if (k < 0 || k >= n) throw InvalidDimension("mode index out of range");
        if (kept[static_cast<std::size_t>(k)]) throw InvalidDimension("mode listed twice");
        kept[static_cast<std::size_t>(k)] = true;
    }
    if (keep.empty()) throw InvalidDimension("partial trace must keep at least one mode");

    std::vector<int> traced;
    for (int m = 0; m < n; ++m)
        if (!kept[static_cast<std::size_t>(m)]) traced.push_back(m);

    const Eigen::Index dk = fock_dimension(d, static_cast<int>(keep.size()));
    const Eigen::Index dt = traced.empty() ? 1 : fock_dimension(d, static_cast<int>(traced.size()));

    // Stride of every mode in the joint flattened index.
    std::vector<Eigen::Index> stride(static_cast<std::size_t>(n));
    Eigen::Index s = 1;
    for (int m = n - 1; m >= 0; --m) {
        stride[static_cast<std::size_t>(m)] = s;
        s *= d;
    }
    auto offsets = [&](std::span<const int> which, Eigen::Index count) {
        std::vector<Eigen::Index> off(static_cast<std::size_t>(count));
        std::vector<int> digits(which.size());
        for (Eigen::Index i = 0; i < count; ++i) {
            unflatten(i, d, digits);
            Eigen::Index o = 0;
            for (std::size_t q = 0; q < which.size(); ++q)
                o += digits[q] * stride[static_cast<std::size_t>(which[q])];
            off[static_cast<std::size_t>(i)] = o;
        }
        return off;
    };
    const auto keep_off = offsets(keep, dk);
    const auto trace_off = offsets(traced, dt);

    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(dk, dk);
    for (Eigen::Index c = 0; c < dk; ++c)
        for (Eigen::Index r = 0; r < dk; ++r) {
            Complex acc = 0.0;
            for (Eigen::Index t = 0; t < dt; ++t)
                acc += joint.matrix(keep_off[r] + trace_off[t], keep_off[c] + trace_off[t]);
            out(r, c) = acc;
        }
    return FockState{static_cast<int>(keep.size()), d, std::move(out), joint.trace_deficit};
}

FockState permute_modes(const FockState& state, std::span<const int> order) {
    if (static_cast<int>(order.size()) != state.modes)
        throw InvalidDimension("permutation length must equal the mode count");
    std::vector<int> sorted(order.begin(), order.end());
    std::sort(sorted.begin(), sorted.end());
    for (int i = 0; i < state.modes; ++i)
        if (sorted[static_cast<std::size_t>(i)] != i) throw InvalidDimension("not a permutation");

    const Eigen::Index dim = state.dimension();
    std::vector<Eigen::Index> map(static_cast<std::size_t>(dim));
    std::vector<int> digits(order.size());
    for (Eigen::Index i = 0; i < dim; ++i) {
        unflatten(i, state.cutoff, digits);
        Eigen::Index j = 0;
        for (std::size_t q = 0; q < order.size(); ++q)
            j = j * state.cutoff + digits[static_cast<std::size_t>(order[q])];
        map[static_cast<std::size_t>(i)] = j;
    }
    // map[i] is the new index of the old basis state i.
    Eigen::MatrixXcd m(dim, dim);
    for (Eigen::Index c = 0; c < dim; ++c)
        for (Eigen::Index r = 0; r < dim; ++r) m(map[r], map[c]) = state.matrix(r, c);
    return FockState{state.modes, state.cutoff, std::move(m), state.trace_deficit};
}

double trace_distance(const FockState& a, const FockState& b) {
    if (a.dimension() != b.dimension()) throw InvalidDimension("trace distance needs equal shapes");
    const Eigen::VectorXd ev = hermitian_eigenvalues(a.matrix - b.matrix);
    return 0.5 * ev.cwiseAbs().sum();
}

}  // namespace moe
