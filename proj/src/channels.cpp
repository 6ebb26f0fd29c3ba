#include "moe/channels.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <sstream>
#include <tuple>

namespace moe {

std::string to_string(ChannelKind kind) {
    switch (kind) {
        case ChannelKind::Attenuator: return "attenuator";
        case ChannelKind::Amplifier: return "amplifier";
        case ChannelKind::Contravariant: return "contravariant";
        case ChannelKind::AdditiveNoise: return "additive-noise";
    }
    return "unknown";
}

ChannelSpec ChannelSpec::attenuator(double eta, double env_photons) {
    ChannelSpec s{ChannelKind::Attenuator, eta, 1.0, env_photons};
    s.validate();
    return s;
}

ChannelSpec ChannelSpec::amplifier(double kappa, double env_photons) {
    ChannelSpec s{ChannelKind::Amplifier, 1.0, kappa, env_photons};
    s.validate();
    return s;
}

ChannelSpec ChannelSpec::contravariant(double kappa, double env_photons) {
    ChannelSpec s{ChannelKind::Contravariant, 1.0, kappa, env_photons};
    s.validate();
    return s;
}

ChannelSpec ChannelSpec::additive_noise(double env_photons) {
    ChannelSpec s{ChannelKind::AdditiveNoise, 1.0, 1.0, env_photons};
    s.validate();
    return s;
}

void ChannelSpec::validate() const {
    if (!std::isfinite(env_photons) || env_photons < 0.0)
        throw InvalidParameter("environment photon number must be finite and >= 0");
    switch (kind) {
        case ChannelKind::Attenuator:
            if (!(eta >= 0.0 && eta <= 1.0)) throw InvalidParameter("attenuator needs 0 <= eta <= 1");
            break;
        case ChannelKind::Amplifier:
            if (!(kappa >= 1.0) || !std::isfinite(kappa)) throw InvalidParameter("amplifier needs kappa >= 1");
            break;
        case ChannelKind::Contravariant:
            if (!(kappa >= 1.0) || !std::isfinite(kappa))
                throw InvalidParameter("contravariant channel needs kappa >= 1");
            if (kappa == 1.0 && env_photons == 0.0)
                throw InvalidParameter("contravariant channel with kappa = 1 needs E > 0");
            break;
        case ChannelKind::AdditiveNoise:
            if (!(env_photons > 0.0)) throw InvalidParameter("additive noise channel needs E > 0");
            break;
    }
}

bool ChannelSpec::is_identity() const {
    return (kind == ChannelKind::Attenuator && eta == 1.0) ||
           (kind == ChannelKind::Amplifier && kappa == 1.0);
}

std::string ChannelSpec::describe() const {
    std::ostringstream os;
    os << to_string(kind);
    if (kind == ChannelKind::Attenuator) os << "(eta=" << eta;
    else if (kind == ChannelKind::AdditiveNoise) os << "(";
    else os << "(kappa=" << kappa;
    if (kind != ChannelKind::AdditiveNoise) os << ", ";
    os << "E=" << env_photons << ")";
    return os.str();
}

void DilationPlan::validate() const {
    if (system_cutoff < 2 || env_cutoff < 2 || output_cutoff < 2)
        throw InvalidDimension("dilation cutoffs must be at least 2");
    if (radial_nodes < 1 || angular_nodes < 1) throw InvalidParameter("quadrature needs nodes");
    if (!(max_deficit >= 0.0)) throw InvalidParameter("max_deficit must be >= 0");
}

int environment_cutoff(double env_photons) {
    if (env_photons <= 0.0) return 2;
    const double q = env_photons / (env_photons + 1.0);
    const int d = static_cast<int>(std::ceil(std::log(1e-10) / std::log(q)));
    return std::max(2, d + 1);
}

namespace {

// Smallest M with P[X >= M] < eps for X negative binomial with `shape`
// trials and mean shape * nu (success ratio nu / (nu + 1)).
int negative_binomial_quantile(int shape, double nu, double eps) {
    if (nu <= 0.0) return 1;
    const double r = nu / (nu + 1.0);
    double tail = 1.0;
    for (int m = 0;; ++m) {
        tail -= std::exp(std::lgamma(m + shape) - std::lgamma(shape) - std::lgamma(m + 1.0) +
                         shape * std::log1p(-r) + m * std::log(r));
        if (tail < eps) return m + 1;
    }
}

}  // namespace

DilationPlan default_plan(const ChannelSpec& spec, int system_cutoff) {
    spec.validate();
    DilationPlan plan;
    plan.system_cutoff = system_cutoff;
    const double E = spec.env_photons;
    plan.env_cutoff = environment_cutoff(E);
    const int ds = system_cutoff;
    const int de = plan.env_cutoff;
    const double k = spec.kappa;
    // The output of the top number state |ds-1> is bounded by a shifted
    // negative binomial law; its 1e-10 quantile sets the output cutoff.
    constexpr double tail = 1e-10;
    switch (spec.kind) {
        case ChannelKind::Attenuator:
            // Every photon-number sector of the input is complete: no leakage.
            plan.output_cutoff = spec.eta == 1.0 ? ds : ds + de - 1;
            break;
        case ChannelKind::Amplifier:
            plan.output_cutoff =
                k == 1.0 ? ds : ds - 1 + negative_binomial_quantile(ds, (k - 1.0) * (E + 1.0), tail);
            break;
        case ChannelKind::Contravariant:
            plan.output_cutoff = negative_binomial_quantile(ds, (k - 1.0) + k * E, tail);
            break;
        case ChannelKind::AdditiveNoise:
            plan.output_cutoff = ds - 1 + negative_binomial_quantile(ds, E, tail);
            break;
    }
    plan.output_cutoff = std::max(plan.output_cutoff, 2);
    return plan;
}

Eigen::MatrixXd expm_tridiagonal_generator(const Eigen::VectorXd& c, double t, Eigen::Index columns) {
    const Eigen::Index n = c.size() + 1;
    columns = std::min(columns, n);
    if (t == 0.0 || n == 1) return Eigen::MatrixXd::Identity(n, columns);

    // With P = diag(i^k), P^{-1} K P = -i S where S is the symmetric
    // tridiagonal matrix with off-diagonal c; exp(tK) = P exp(-itS) P^{-1}.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
    solver.computeFromTridiagonal(Eigen::VectorXd::Zero(n), c, Eigen::ComputeEigenvectors);
    if (solver.info() != Eigen::Success) throw Error("tridiagonal eigensolver did not converge");
    const Eigen::MatrixXd& w = solver.eigenvectors();
    const Eigen::ArrayXd phase = t * solver.eigenvalues().array();
    const Eigen::MatrixXd wt = w.topRows(columns).transpose();
    const Eigen::MatrixXd cos_part = w * (phase.cos().matrix().asDiagonal() * wt);
    const Eigen::MatrixXd sin_part = w * (phase.sin().matrix().asDiagonal() * wt);

    Eigen::MatrixXd u(n, columns);
    for (Eigen::Index k = 0; k < columns; ++k)
        for (Eigen::Index j = 0; j < n; ++j) {
            switch ((((j - k) % 4) + 4) % 4) {
                case 0: u(j, k) = cos_part(j, k); break;
                case 1: u(j, k) = sin_part(j, k); break;
                case 2: u(j, k) = -cos_part(j, k); break;
                default: u(j, k) = -sin_part(j, k); break;
            }
        }
    return u;
}

namespace {

double squeezing_parameter(double kappa) { return std::acosh(std::sqrt(kappa)); }

// Extra sector length needed before the reflection at the padded edge is
// below double precision; amplitudes decay like tanh(r)^k.
int squeezer_padding(double kappa) {
    if (kappa == 1.0) return 0;
    const double t2 = (kappa - 1.0) / kappa;  // tanh^2 r
    const int pad = static_cast<int>(std::ceil(37.0 / -std::log(t2))) + 10;
    return std::min(pad, 1200);
}

// Sector of the two-mode squeezer with photon difference d = n_a - n_b, of
// length `length`. Local index k is the state (k + max(d,0), k + max(-d,0)).
Eigen::MatrixXd squeezer_sector(int d, double r, int length, int columns) {
    const int dp = std::max(d, 0);
    const int dm = std::max(-d, 0);
    Eigen::VectorXd c(std::max(length - 1, 0));
    for (int k = 0; k + 1 < length; ++k)
        c(k) = std::sqrt(static_cast<double>(k + dp + 1) * static_cast<double>(k + dm + 1));
    return expm_tridiagonal_generator(c, r, columns);
}

// Sector of the beam splitter with N photons in total; local index j is the
// number of photons in mode A.
Eigen::MatrixXd beam_splitter_sector(int total, double theta) {
    Eigen::VectorXd c(total);
    for (int j = 0; j < total; ++j)
        c(j) = std::sqrt(static_cast<double>(j + 1) * static_cast<double>(total - j));
    return expm_tridiagonal_generator(c, theta, total + 1);
}

// exp(r (a^dag - a)) on `padded` levels, first `columns` columns.
Eigen::MatrixXd real_displacement(double r, int padded, int columns) {
    Eigen::VectorXd c(padded - 1);
    for (int k = 0; k + 1 < padded; ++k) c(k) = std::sqrt(static_cast<double>(k + 1));
    return expm_tridiagonal_generator(c, r, columns);
}

std::vector<double> thermal_weights(double E, int cutoff) {
    const FockState env = thermal_state(E, cutoff);
    std::vector<double> w(static_cast<std::size_t>(cutoff));
    for (int m = 0; m < cutoff; ++m) w[static_cast<std::size_t>(m)] = env.matrix(m, m).real();
    return w;
}

// Dense accumulator for a phase-covariant (or -contravariant) transfer map:
// the image of |i><i'| only touches entries (i+s, i'+s) (covariant) or
// (c-i, c-i') (contravariant).
class TransferBuilder {
public:
    TransferBuilder(int in_dim, int out_dim, bool contravariant)
        : in_(in_dim), out_(out_dim), contra_(contravariant),
          width_(in_dim + out_dim),
          buffer_(static_cast<std::size_t>(in_dim) * in_dim * (in_dim + out_dim), 0.0) {}

    // Covariant: output (i+s, i'+s). Contravariant: output (c-i, c-i'), s := c.
    void add(int i, int ip, int s, double value) {
        buffer_[index(i, ip, s)] += value;
    }

    Eigen::SparseMatrix<Complex> finish() const {
        std::vector<Eigen::Triplet<Complex>> triplets;
        for (int ip = 0; ip < in_; ++ip)
            for (int i = 0; i < in_; ++i)
                for (int t = 0; t < width_; ++t) {
                    const double v = buffer_[index_raw(i, ip, t)];
                    if (v == 0.0) continue;
                    int a;
                    int ap;
                    if (contra_) {
                        a = t - i;
                        ap = t - ip;
                    } else {
                        a = i + t - in_;
                        ap = ip + t - in_;
                    }
                    if (a < 0 || ap < 0 || a >= out_ || ap >= out_) continue;
                    triplets.emplace_back(a + ap * out_, i + ip * in_, Complex(v, 0.0));
                }
        Eigen::SparseMatrix<Complex> t(static_cast<Eigen::Index>(out_) * out_,
                                       static_cast<Eigen::Index>(in_) * in_);
        t.setFromTriplets(triplets.begin(), triplets.end());
        t.makeCompressed();
        return t;
    }

private:
    std::size_t index_raw(int i, int ip, int t) const {
        return (static_cast<std::size_t>(ip) * in_ + i) * width_ + t;
    }
    std::size_t index(int i, int ip, int s) const {
        return index_raw(i, ip, contra_ ? s : s + in_);
    }

    int in_;
    int out_;
    bool contra_;
    int width_;
    std::vector<double> buffer_;
};

Eigen::SparseMatrix<Complex> attenuator_transfer(const ChannelSpec& spec, const DilationPlan& plan) {
    const int ds = plan.system_cutoff;
    const int de = plan.env_cutoff;
    const int dout = plan.output_cutoff;
    const double theta = std::acos(std::sqrt(spec.eta));
    const auto omega = thermal_weights(spec.env_photons, de);

    std::vector<Eigen::MatrixXd> sector(static_cast<std::size_t>(ds + de - 1));
    for (int n = 0; n < ds + de - 1; ++n) sector[static_cast<std::size_t>(n)] = beam_splitter_sector(n, theta);

    TransferBuilder builder(ds, dout, false);
    for (int m = 0; m < de; ++m) {
        const double w = omega[static_cast<std::size_t>(m)];
        if (w == 0.0) continue;
        for (int ip = 0; ip < ds; ++ip) {
            const Eigen::MatrixXd& up = sector[static_cast<std::size_t>(ip + m)];
            for (int i = 0; i < ds; ++i) {
                const Eigen::MatrixXd& u = sector[static_cast<std::size_t>(i + m)];
                // Environment photons b are traced out; a = i + m - b.
                for (int b = 0; b <= std::min(i, ip) + m; ++b) {
                    const int a = i + m - b;
                    const int ap = ip + m - b;
                    if (a >= dout || ap >= dout) continue;
                    builder.add(i, ip, m - b, w * u(a, i) * up(ap, ip));
                }
            }
        }
    }
    return builder.finish();
}

// Amplifier (trace mode B) and contravariant channel (trace mode A) share
// the squeezer dilation.
Eigen::SparseMatrix<Complex> squeezer_transfer(const ChannelSpec& spec, const DilationPlan& plan,
                                               bool keep_b) {
    const int ds = plan.system_cutoff;
    const int de = plan.env_cutoff;
    const int dout = plan.output_cutoff;
    const double r = squeezing_parameter(spec.kappa);
    const auto omega = thermal_weights(spec.env_photons, de);
    const int length = dout + squeezer_padding(spec.kappa) + 1;
    const int columns = std::min(ds, de);

    // Sectors d = i - m for i < ds, m < de.
    std::vector<Eigen::MatrixXd> sector(static_cast<std::size_t>(ds + de - 1));
    for (int d = -(de - 1); d <= ds - 1; ++d)
        sector[static_cast<std::size_t>(d + de - 1)] = squeezer_sector(d, r, length, columns);
    auto amp = [&](int d, int k_out, int k_in) {
        return sector[static_cast<std::size_t>(d + de - 1)](k_out, k_in);
    };

    TransferBuilder builder(ds, dout, keep_b);
    for (int m = 0; m < de; ++m) {
        const double w = omega[static_cast<std::size_t>(m)];
        if (w == 0.0) continue;
        for (int ip = 0; ip < ds; ++ip) {
            const int dp = ip - m;
            const int kp = std::min(ip, m);
            for (int i = 0; i < ds; ++i) {
                const int d = i - m;
                const int k = std::min(i, m);
                if (!keep_b) {
                    // Output photons p = q + d, p' = q + d'; q is traced.
                    for (int q = std::max({0, -d, -dp});; ++q) {
                        const int p = q + d;
                        const int pp = q + dp;
                        if (p >= dout || pp >= dout) break;
                        builder.add(i, ip, q - m, w * amp(d, std::min(p, q), k) * amp(dp, std::min(pp, q), kp));
                    }
                } else {
                    // Output photons q = p - d, q' = p - d'; p is traced.
                    for (int p = std::max({0, d, dp});; ++p) {
                        const int q = p - d;
                        const int qp = p - dp;
                        if (q >= dout || qp >= dout) break;
                        builder.add(i, ip, p + m, w * amp(d, std::min(p, q), k) * amp(dp, std::min(p, qp), kp));
                    }
                }
            }
        }
    }
    return builder.finish();
}

Eigen::SparseMatrix<Complex> additive_noise_transfer(const ChannelSpec& spec, const DilationPlan& plan) {
    const int ds = plan.system_cutoff;
    const int dout = plan.output_cutoff;
    const double E = spec.env_photons;

    Eigen::VectorXd nodes;
    Eigen::VectorXd weights;
    gauss_laguerre(plan.radial_nodes, nodes, weights);

    // Angular integral: a uniform periodic rule with more nodes than the
    // largest phase frequency (dout + ds) averages exp(i m phi) to
    // delta_{m,0} exactly, so it reduces to keeping the photon-shift-
    // preserving terms below.

    TransferBuilder builder(ds, dout, false);
    for (Eigen::Index node = 0; node < nodes.size(); ++node) {
        const double w = weights(node);
        if (w < 1e-300) continue;
        const double r = std::sqrt(E * nodes(node));
        const double mean = r * r;
        const int padded = std::max(dout, ds) + ds +
                           static_cast<int>(std::ceil(mean + 8.0 * r)) + 20;
        const Eigen::MatrixXd dr = real_displacement(r, std::min(padded, 2000), ds);
        for (int ip = 0; ip < ds; ++ip)
            for (int i = 0; i < ds; ++i)
                for (int a = 0; a < dout; ++a) {
                    const int ap = ip + a - i;
                    if (ap < 0 || ap >= dout) continue;
                    builder.add(i, ip, a - i, w * dr(a, i) * dr(ap, ip));
                }
    }
    return builder.finish();
}

struct MemoKey {
    ChannelKind kind;
    double eta, kappa, env;
    int ds, de, dout, radial, angular;
    auto tie() const { return std::tie(kind, eta, kappa, env, ds, de, dout, radial, angular); }
    bool operator<(const MemoKey& o) const { return tie() < o.tie(); }
};

std::mutex memo_mutex;
std::map<MemoKey, std::shared_ptr<const ChannelMap>> memo;

}  // namespace

Eigen::MatrixXcd beam_splitter_unitary(double eta, int cutoff) {
    if (!(eta >= 0.0 && eta <= 1.0)) throw InvalidParameter("beam splitter needs 0 <= eta <= 1");
    const Eigen::Index dim = fock_dimension(cutoff, 2);
    const double theta = std::acos(std::sqrt(eta));
    Eigen::MatrixXcd u = Eigen::MatrixXcd::Zero(dim, dim);
    for (int n = 0; n <= 2 * cutoff - 2; ++n) {
        const int lo = std::max(0, n - cutoff + 1);
        const int hi = std::min(n, cutoff - 1);
        const int size = hi - lo + 1;
        Eigen::VectorXd c(size - 1);
        for (int l = 0; l + 1 < size; ++l) {
            const int j = lo + l;
            c(l) = std::sqrt(static_cast<double>(j + 1) * static_cast<double>(n - j));
        }
        const Eigen::MatrixXd block = expm_tridiagonal_generator(c, theta, size);
        for (int col = 0; col < size; ++col)
            for (int row = 0; row < size; ++row) {
                const int ja = lo + row;
                const int ia = lo + col;
                u(ja * cutoff + (n - ja), ia * cutoff + (n - ia)) = block(row, col);
            }
    }
    return u;
}

Eigen::MatrixXcd two_mode_squeezer(double kappa, int cutoff) {
    if (!(kappa >= 1.0)) throw InvalidParameter("two-mode squeezer needs kappa >= 1");
    const Eigen::Index dim = fock_dimension(cutoff, 2);
    const double r = squeezing_parameter(kappa);
    Eigen::MatrixXcd u = Eigen::MatrixXcd::Zero(dim, dim);
    for (int d = -(cutoff - 1); d <= cutoff - 1; ++d) {
        const int dp = std::max(d, 0);
        const int dm = std::max(-d, 0);
        const int size = cutoff - std::abs(d);
        const Eigen::MatrixXd block = squeezer_sector(d, r, size + squeezer_padding(kappa), size);
        for (int col = 0; col < size; ++col)
            for (int row = 0; row < size; ++row)
                u((row + dp) * cutoff + (row + dm), (col + dp) * cutoff + (col + dm)) = block(row, col);
    }
    return u;
}

Eigen::MatrixXcd displacement_operator(Complex alpha, int cutoff, int padded_cutoff) {
    if (cutoff < 2) throw InvalidDimension("displacement needs cutoff >= 2");
    const double r = std::abs(alpha);
    const double phi = std::arg(alpha);
    const int needed = cutoff + static_cast<int>(std::ceil(r * r + 8.0 * r)) + 40;
    const int padded = std::max(padded_cutoff, needed);
    const Eigen::MatrixXd dr = real_displacement(r, padded, cutoff);
    Eigen::MatrixXcd out(cutoff, cutoff);
    // D(r e^{i phi}) = R(phi) D(r) R(phi)^dag with R(phi) = exp(i phi a^dag a).
    for (int i = 0; i < cutoff; ++i)
        for (int a = 0; a < cutoff; ++a) out(a, i) = std::polar(dr(a, i), phi * (a - i));
    return out;
}

double unitarity_defect(const Eigen::MatrixXcd& u) {
    return (u.adjoint() * u - Eigen::MatrixXcd::Identity(u.cols(), u.cols())).cwiseAbs().maxCoeff();
}

void gauss_laguerre(int n, Eigen::VectorXd& nodes, Eigen::VectorXd& weights) {
    if (n < 1) throw InvalidParameter("Gauss-Laguerre needs at least one node");
    // Golub-Welsch on the Jacobi matrix of the Laguerre polynomials.
    Eigen::VectorXd diag(n);
    Eigen::VectorXd sub(std::max(n - 1, 0));
    for (int k = 0; k < n; ++k) diag(k) = 2.0 * k + 1.0;
    for (int k = 0; k + 1 < n; ++k) sub(k) = k + 1.0;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
    solver.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
    nodes = solver.eigenvalues();
    weights = solver.eigenvectors().row(0).array().square().transpose();
}

ChannelMap::ChannelMap(int input_dim, int output_dim, Eigen::SparseMatrix<Complex> transfer)
    : input_dim_(input_dim), output_dim_(output_dim), transfer_(std::move(transfer)) {}

Eigen::MatrixXcd ChannelMap::apply(const Eigen::MatrixXcd& rho) const {
    if (rho.rows() != input_dim_ || rho.cols() != input_dim_)
        throw InvalidDimension("operator does not match the channel input dimension");
    const Eigen::Map<const Eigen::VectorXcd> v(rho.data(), rho.size());
    Eigen::VectorXcd out = transfer_ * v;
    return Eigen::Map<Eigen::MatrixXcd>(out.data(), output_dim_, output_dim_);
}

Eigen::MatrixXcd ChannelMap::apply_to_mode(const Eigen::MatrixXcd& op, std::vector<int>& dims,
                                           int mode) const {
    if (mode < 0 || mode >= static_cast<int>(dims.size())) throw InvalidDimension("mode out of range");
    const int dj = dims[static_cast<std::size_t>(mode)];
    if (dj != input_dim_) throw InvalidDimension("mode dimension does not match the channel input");
    Eigen::Index pre = 1;
    Eigen::Index post = 1;
    for (int k = 0; k < mode; ++k) pre *= dims[static_cast<std::size_t>(k)];
    for (std::size_t k = static_cast<std::size_t>(mode) + 1; k < dims.size(); ++k) post *= dims[k];
    const Eigen::Index dim = pre * dj * post;
    if (op.rows() != dim || op.cols() != dim) throw InvalidDimension("operator shape mismatch");

    // Rows: (i, i') of the acted-on mode. Columns: (p, q, p', q') of the rest.
    const Eigen::Index rest = pre * post;
    Eigen::MatrixXcd stacked(static_cast<Eigen::Index>(dj) * dj, rest * rest);
    for (Eigen::Index pc = 0; pc < pre; ++pc)
        for (int ic = 0; ic < dj; ++ic)
            for (Eigen::Index qc = 0; qc < post; ++qc) {
                const Eigen::Index col = (pc * dj + ic) * post + qc;
                const Eigen::Index rest_c = pc * post + qc;
                for (Eigen::Index pr = 0; pr < pre; ++pr)
                    for (int ir = 0; ir < dj; ++ir)
                        for (Eigen::Index qr = 0; qr < post; ++qr) {
                            const Eigen::Index row = (pr * dj + ir) * post + qr;
                            stacked(ir + static_cast<Eigen::Index>(ic) * dj,
                                    (pr * post + qr) * rest + rest_c) = op(row, col);
                        }
            }
    const Eigen::MatrixXcd mapped = transfer_ * stacked;

    const int dout = output_dim_;
    const Eigen::Index out_dim = pre * dout * post;
    Eigen::MatrixXcd out(out_dim, out_dim);
    for (Eigen::Index pc = 0; pc < pre; ++pc)
        for (int ac = 0; ac < dout; ++ac)
            for (Eigen::Index qc = 0; qc < post; ++qc) {
                const Eigen::Index col = (pc * dout + ac) * post + qc;
                const Eigen::Index rest_c = pc * post + qc;
                for (Eigen::Index pr = 0; pr < pre; ++pr)
                    for (int ar = 0; ar < dout; ++ar)
                        for (Eigen::Index qr = 0; qr < post; ++qr) {
                            const Eigen::Index row = (pr * dout + ar) * post + qr;
                            out(row, col) = mapped(ar + static_cast<Eigen::Index>(ac) * dout,
                                                   (pr * post + qr) * rest + rest_c);
                        }
            }
    dims[static_cast<std::size_t>(mode)] = dout;
    return out;
}

Eigen::VectorXcd ChannelMap::apply_to_populations(const Eigen::VectorXd& p, int modes) const {
    const int din = input_dim_;
    const int dout = output_dim_;
    Eigen::MatrixXd pop(dout, din);
    for (int i = 0; i < din; ++i)
        for (int a = 0; a < dout; ++a) pop(a, i) = transfer_.coeff(a + a * dout, i + i * din).real();

    Eigen::VectorXd cur = p;
    Eigen::Index pre = 1;
    Eigen::Index post = static_cast<Eigen::Index>(std::llround(std::pow(din, modes - 1)));
    for (int mode = 0; mode < modes; ++mode) {
        // cur is laid out (pre, din, post); mode `mode` is replaced by dout.
        Eigen::VectorXd next(pre * dout * post);
        for (Eigen::Index a = 0; a < pre; ++a) {
            const Eigen::Map<const Eigen::MatrixXd> in(cur.data() + a * din * post, post, din);
            Eigen::Map<Eigen::MatrixXd> out(next.data() + a * dout * post, post, dout);
            out.noalias() = in * pop.transpose();
        }
        cur = std::move(next);
        pre *= dout;
        if (mode + 1 < modes) post /= din;
    }
    return cur.cast<Complex>();
}

std::shared_ptr<const ChannelMap> channel_map(const ChannelSpec& spec, const DilationPlan& plan) {
    spec.validate();
    plan.validate();
    const MemoKey key{spec.kind, spec.eta, spec.kappa, spec.env_photons, plan.system_cutoff,
                      plan.env_cutoff, plan.output_cutoff, plan.radial_nodes, plan.angular_nodes};
    {
        std::lock_guard<std::mutex> lock(memo_mutex);
        if (auto it = memo.find(key); it != memo.end()) return it->second;
    }
    Eigen::SparseMatrix<Complex> transfer;
    switch (spec.kind) {
        case ChannelKind::Attenuator: transfer = attenuator_transfer(spec, plan); break;
        case ChannelKind::Amplifier: transfer = squeezer_transfer(spec, plan, false); break;
        case ChannelKind::Contravariant: transfer = squeezer_transfer(spec, plan, true); break;
        case ChannelKind::AdditiveNoise: transfer = additive_noise_transfer(spec, plan); break;
    }
    auto built = std::make_shared<const ChannelMap>(plan.system_cutoff, plan.output_cutoff, std::move(transfer));
    std::lock_guard<std::mutex> lock(memo_mutex);
    return memo.emplace(key, std::move(built)).first->second;
}

namespace {

FockState fit_to_plan(const FockState& state, const DilationPlan& plan) {
    if (state.cutoff == plan.system_cutoff) return state;
    if (state.cutoff < plan.system_cutoff) return embed(state, plan.system_cutoff);
    throw InvalidDimension("state cutoff " + std::to_string(state.cutoff) +
                           " exceeds the plan's system cutoff " + std::to_string(plan.system_cutoff));
}

FockState finish_output(const FockState& input, Eigen::MatrixXcd out, int modes, int cutoff,
                        const DilationPlan& plan) {
    out = 0.5 * (out + out.adjoint()).eval();
    const double leaked = std::max(0.0, input.trace() - out.trace().real());
    if (leaked > plan.max_deficit)
        throw TruncationError("channel output leaked " + std::to_string(leaked) +
                                  " of probability beyond the output cutoff",
                              leaked);
    return FockState{modes, cutoff, std::move(out), input.trace_deficit + leaked};
}

}  // namespace

FockState apply_channel(const ChannelSpec& spec, const FockState& state, const DilationPlan& plan) {
    if (state.modes != 1) throw InvalidParameter("apply_channel takes one-mode states; use apply_tensor_power");
    const FockState input = fit_to_plan(state, plan);
    const auto map = channel_map(spec, plan);
    return finish_output(input, map->apply(input.matrix), 1, plan.output_cutoff, plan);
}

FockState apply_channel(const ChannelSpec& spec, const FockState& state) {
    return apply_channel(spec, state, default_plan(spec, state.cutoff));
}

FockState apply_tensor_power(const ChannelSpec& spec, const FockState& state, int n,
                             const DilationPlan& plan) {
    if (n < 1 || state.modes != n) throw InvalidParameter("state must have exactly n modes");
    const FockState input = fit_to_plan(state, plan);

    const double out_side = std::pow(static_cast<double>(plan.output_cutoff), n);
    const double work_side = std::pow(static_cast<double>(std::max(plan.output_cutoff, plan.system_cutoff)), n);
    const double bytes = 16.0 * (out_side * out_side + 2.0 * work_side * work_side);
    if (bytes > static_cast<double>(plan.memory_budget_bytes))
        throw ResourceError("tensor power needs about " + std::to_string(bytes / 1e6) +
                            " MB, above the memory budget");

    const auto map = channel_map(spec, plan);
    if (input.matrix.isDiagonal(0.0)) {
        // Phase covariance keeps diagonal inputs diagonal: only populations move.
        return finish_output(input, map->apply_to_populations(input.matrix.diagonal().real(), n).asDiagonal(),
                             n, plan.output_cutoff, plan);
    }
    std::vector<int> dims(static_cast<std::size_t>(n), plan.system_cutoff);
    Eigen::MatrixXcd op = input.matrix;
    for (int mode = 0; mode < n; ++mode) op = map->apply_to_mode(op, dims, mode);
    return finish_output(input, std::move(op), n, plan.output_cutoff, plan);
}

bool is_entanglement_breaking(const ChannelSpec& spec) {
    spec.validate();
    const double E = spec.env_photons;
    switch (spec.kind) {
        case ChannelKind::Attenuator:
            if (spec.eta == 1.0) return false;
            return E >= spec.eta / (1.0 - spec.eta);
        case ChannelKind::Amplifier:
            if (spec.kappa == 1.0) return false;
            return E >= 1.0 / (spec.kappa - 1.0);
        case ChannelKind::Contravariant: return true;
        case ChannelKind::AdditiveNoise: return E >= 1.0;
    }
    return false;
}

FockState additive_noise_via_composition(double env_photons, const FockState& state,
                                         const DilationPlan& plan) {
    if (!(env_photons > 0.0)) throw InvalidParameter("composition needs E > 0");
    const ChannelSpec att = ChannelSpec::attenuator(1.0 / (env_photons + 1.0), 0.0);
    const ChannelSpec amp = ChannelSpec::amplifier(env_photons + 1.0, 0.0);

    DilationPlan first = plan;
    first.env_cutoff = 2;
    // A quantum-limited attenuator never adds photons.
    first.output_cutoff = plan.system_cutoff;
    FockState mid = apply_channel(att, state, first);

    DilationPlan second = plan;
    second.env_cutoff = 2;
    return apply_channel(amp, mid, second);
}

}  // namespace moe
