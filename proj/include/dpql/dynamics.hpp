#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <json.hpp>

#include "dpql/hamiltonian.hpp"
#include "dpql/hilbert.hpp"
#include "dpql/schedule.hpp"

// Time evolution under trap-frequency sweeps and splitting ramps, closed
// (Schrodinger) or open (Lindblad with motional heating).
//
// Propagation happens in the interaction picture of the instantaneous
// diagonal part sum_i w_mol^i(t)/2 sz^i + sum_q w_q(t)(n_q + 1/2). The frame
// transformation is diagonal, so every reported population and occupation is
// identical to the lab frame; snapshots are rotated back before they are
// stored. Mode frequencies scale with the trap control, w_q(t) =
// w_q(0) * w0(t)/w0(0), and couplings follow g_q(t) ~ w_q(t)^{3/2}.
namespace dpql {

struct HeatingSpec {
    std::vector<double> gamma;  // quanta/s per included mode; d<n>/dt = gamma for a free mode

    static HeatingSpec none(int modes) { return {std::vector<double>(modes, 0.0)}; }
    bool any() const {
        for (double g : gamma)
            if (g != 0.0) return true;
        return false;
    }
    void validate(int modes) const {
        if (static_cast<int>(gamma.size()) != modes)
            throw std::invalid_argument("heating: rate count mismatch");
        for (double g : gamma)
            if (g < 0.0) throw std::invalid_argument("heating: rates must be >= 0");
    }
};

struct IntegratorOptions {
    double phase_per_step = 0.1;   // max coefficient phase advance per step, rad
    long min_steps = 200;
    int max_records = 1200;
    bool record_snapshots = false;
    double norm_tol = 1e-8;
    double trace_tol = 1e-7;
    double top_fock_tol = 1e-4;    // truncation-overflow threshold on the top level
    bool enforce_truncation = true;
    bool check_positivity = false; // eigen-decompose rho at record points
};

struct SimResult {
    std::vector<double> times;
    Eigen::MatrixXd qubit_excitation;  // (records, molecules): |<f_i|psi>|^2
    Eigen::MatrixXd mode_occupation;   // (records, modes): <n_q>
    std::vector<double> snapshot_times;
    std::vector<VectorXcd> snapshots;  // lab frame
    long steps = 0;
    double norm_drift = 0.0;
    double trace_drift = 0.0;
    double max_top_fock = 0.0;     // top-level population, max over run
    double max_top_two_fock = 0.0;
    double min_eigenvalue = 0.0;   // only when check_positivity
    StateVector final_state;       // closed runs
    DensityMatrix final_rho;       // open runs
    nlohmann::json metadata;
};

namespace detail {

struct CouplingTerm {
    int mode = 0, mol = 0;
    SparseCd op;      // sigma+_i a_q   (rotating part)
    SparseCd op_dag;
    SparseCd cr;      // sigma+_i a_q^dag (counter-rotating part)
    SparseCd cr_dag;
};

struct PropagationContext {
    HilbertLayout layout;
    std::vector<CouplingTerm> terms;
    // per-basis-state quanta for phase bookkeeping and observables
    std::vector<std::vector<int>> fock_of;   // [mode][idx]
    std::vector<std::vector<int>> bit_of;    // [qubit][idx]

    PropagationContext(const SystemSpec& spec, const HilbertLayout& lay) : layout(lay) {
        spec.validate(lay);
        for (int q = 0; q < spec.mode_count(); ++q) {
            const SparseCd a = build_mode_op(lay, q, ModeOpKind::a).mat;
            const SparseCd ad = build_mode_op(lay, q, ModeOpKind::a_dagger).mat;
            for (int i = 0; i < spec.molecule_count(); ++i) {
                if (spec.g(q, i) == 0.0) continue;
                CouplingTerm t;
                t.mode = q;
                t.mol = i;
                const SparseCd sp = build_qubit_op(lay, i, QubitOpKind::sigma_plus).mat;
                t.op = SparseCd(sp * a);
                t.op_dag = SparseCd(t.op.adjoint());
                t.cr = SparseCd(sp * ad);
                t.cr_dag = SparseCd(t.cr.adjoint());
                terms.push_back(std::move(t));
            }
        }
        fock_of.resize(static_cast<size_t>(lay.mode_count()));
        for (int q = 0; q < lay.mode_count(); ++q) {
            fock_of[q].resize(static_cast<size_t>(lay.total_dim));
            for (int k = 0; k < lay.total_dim; ++k) fock_of[q][k] = lay.fock_level(k, q);
        }
        bit_of.resize(static_cast<size_t>(lay.qubit_count));
        for (int i = 0; i < lay.qubit_count; ++i) {
            bit_of[i].resize(static_cast<size_t>(lay.total_dim));
            for (int k = 0; k < lay.total_dim; ++k) bit_of[i][k] = lay.qubit_bit(k, i);
        }
    }
};

// Time-dependent scalars of the interaction-picture Hamiltonian.
struct Coefficients {
    std::vector<cd> rot;  // per coupling term
    std::vector<cd> cr;
};

class CoefficientEvaluator {
public:
    CoefficientEvaluator(const SystemSpec& spec, const ControlSchedule& sched,
                         const PropagationContext& ctx)
        : spec_(&spec), sched_(&sched), ctx_(&ctx), weights_(spec.weights_or_default()) {}

    void eval(double t, Coefficients& out) const {
        const double s = sched_->mode_scale(t);
        const double g_scale = s * std::sqrt(s);
        const double si = sched_->mode_scale_integral(t);
        const double d_int = sched_->delta.integral(t);
        out.rot.resize(ctx_->terms.size());
        out.cr.resize(ctx_->terms.size());
        for (size_t k = 0; k < ctx_->terms.size(); ++k) {
            const auto& term = ctx_->terms[k];
            const double g = spec_->g(term.mode, term.mol) * g_scale;
            const double phi_mol =
                spec_->omega_mol[term.mol] * t + weights_[term.mol] * d_int;
            const double phi_mode = spec_->mode_omega[term.mode] * si;
            out.rot[k] = 0.5 * g * std::exp(cd(0.0, phi_mol - phi_mode));
            out.cr[k] = spec_->rwa ? cd(0.0) : 0.5 * g * std::exp(cd(0.0, phi_mol + phi_mode));
        }
    }

    // Step-size control: the fastest coefficient oscillation plus a margin
    // for the coupling magnitude itself, so slow-carrier (near-resonant RWA)
    // runs still step well inside ||H_I|| dt << 1.
    double max_phase_rate(double duration) const {
        double wmax = 0.0, smax = 0.0;
        const int samples = 64;
        for (int k = 0; k <= samples; ++k) {
            const double t = duration * k / samples;
            const double s = sched_->mode_scale(t);
            smax = std::max(smax, s);
            const double dv = std::abs(sched_->delta.value(t));
            for (double wm : spec_->omega_mol) {
                for (double wq : spec_->mode_omega) {
                    const double mode_w = wq * s;
                    const double carrier = spec_->rwa
                                               ? std::abs(wm - mode_w) + 0.5 * dv
                                               : wm + mode_w + 0.5 * dv;
                    wmax = std::max(wmax, carrier);
                }
            }
        }
        double coupling = 0.0;
        for (const auto& term : ctx_->terms)
            coupling += std::abs(spec_->g(term.mode, term.mol)) * smax * std::sqrt(smax) *
                        std::sqrt(double(ctx_->layout.mode_dims[term.mode]));
        return wmax + 6.0 * coupling;
    }

    // Diagonal lab-frame phase of basis state k at time t.
    double frame_phase(int k, double t) const {
        const double si = sched_->mode_scale_integral(t);
        const double d_int = sched_->delta.integral(t);
        double phi = 0.0;
        for (int i = 0; i < spec_->molecule_count(); ++i) {
            const double sign = ctx_->bit_of[i][static_cast<size_t>(k)] ? 0.5 : -0.5;
            phi += sign * (spec_->omega_mol[i] * t + weights_[i] * d_int);
        }
        for (int q = 0; q < spec_->mode_count(); ++q)
            phi += (ctx_->fock_of[q][static_cast<size_t>(k)] + 0.5) * spec_->mode_omega[q] * si;
        return phi;
    }

private:
    const SystemSpec* spec_;
    const ControlSchedule* sched_;
    const PropagationContext* ctx_;
    std::vector<double> weights_;
};

inline void apply_h(const PropagationContext& ctx, const Coefficients& c, const VectorXcd& x,
                    VectorXcd& y) {
    y.setZero();
    for (size_t k = 0; k < ctx.terms.size(); ++k) {
        const auto& t = ctx.terms[k];
        y.noalias() += c.rot[k] * (t.op * x);
        y.noalias() += std::conj(c.rot[k]) * (t.op_dag * x);
        if (c.cr[k] != cd(0.0)) {
            y.noalias() += c.cr[k] * (t.cr * x);
            y.noalias() += std::conj(c.cr[k]) * (t.cr_dag * x);
        }
    }
}

} // namespace detail

struct AdiabaticityEntry {
    size_t segment = 0;
    int mode = -1;            // -1 = trap-rate reference entry
    double omega_dot = 0.0;   // rad/s^2
    double ratio_coupling = 0.0;   // omega_dot / g^2
    double ratio_frequency = 0.0;  // omega_dot / omega_q^2 (worst over segment)
    bool warning = false;
};

struct AdiabaticityReport {
    std::vector<AdiabaticityEntry> entries;
    double ratio_trap = 0.0;  // |d omega0/dt| / g_mol^2, worst segment
    bool pass = true;
};

// Sweep-rate sanity: the trap-rate ratio |d omega0/dt| / g_mol^2 against the
// spec threshold (default 0.1), plus per-segment, per-mode ratios
// omega_dot_q / g_eff^2 and omega_dot_q / omega_q^2. The per-mode coupling
// threshold defaults to 0.35: a linear crossing at that rate still transfers
// with probability ~0.99, so only genuinely marginal sweeps warn.
inline AdiabaticityReport sweep_adiabaticity_check(const ControlSchedule& sched,
                                                   const SystemSpec& spec, double g_mol = 0.0,
                                                   double trap_threshold = 0.1,
                                                   double mode_threshold = 0.35) {
    AdiabaticityReport rep;
    double gref = std::abs(g_mol);
    if (gref == 0.0) gref = spec.g.cwiseAbs().maxCoeff();
    for (size_t seg = 0; seg < sched.trap.segment_count(); ++seg) {
        double t0, t1, v0, v1;
        sched.trap.segment(seg, t0, t1, v0, v1);
        const double rate0 = t1 > t0 ? std::abs((v1 - v0) / (t1 - t0)) : 0.0;
        rep.ratio_trap = std::max(rep.ratio_trap, rate0 / (gref * gref));
        if (rate0 / (gref * gref) > trap_threshold) rep.pass = false;
        double wmol_mean = 0.0;
        for (double wm : spec.omega_mol) wmol_mean += wm / spec.molecule_count();
        for (int q = 0; q < spec.mode_count(); ++q) {
            const double r = spec.mode_omega[q] / sched.omega0_ref;
            const double wq_min = r * std::min(v0, v1);
            // couplings evaluated where the crossing happens
            const double res_scale = std::pow(wmol_mean / spec.mode_omega[q], 1.5);
            double geff2 = 0.0;
            for (int i = 0; i < spec.molecule_count(); ++i)
                geff2 += spec.g(q, i) * spec.g(q, i) * res_scale * res_scale;
            AdiabaticityEntry e;
            e.segment = seg;
            e.mode = q;
            e.omega_dot = r * rate0;
            e.ratio_coupling = geff2 > 0.0 ? e.omega_dot / geff2 : 0.0;
            e.ratio_frequency = wq_min > 0.0 ? e.omega_dot / (wq_min * wq_min) : 0.0;
            e.warning = e.ratio_coupling > mode_threshold || e.ratio_frequency > mode_threshold;
            if (e.warning) rep.pass = false;
            rep.entries.push_back(e);
        }
    }
    return rep;
}

inline SimResult propagate_schrodinger(const SystemSpec& spec, const ControlSchedule& sched,
                                       const StateVector& psi0,
                                       const IntegratorOptions& opt = {}) {
    if (sched.duration <= 0.0) throw std::invalid_argument("propagate: duration must be > 0");
    const HilbertLayout& lay = psi0.layout;
    detail::PropagationContext ctx(spec, lay);
    detail::CoefficientEvaluator coeff(spec, sched, ctx);

    const double wmax = coeff.max_phase_rate(sched.duration);
    long n = static_cast<long>(std::ceil(sched.duration * wmax / opt.phase_per_step));
    n = std::max(n, opt.min_steps);
    const double dt = sched.duration / double(n);
    if (dt <= 0.0 || !std::isfinite(dt)) throw std::runtime_error("propagate: step-size underflow");

    SimResult res;
    const long stride = std::max<long>(1, n / std::max(1, opt.max_records - 1));
    const long nrec = n / stride + 1 + (n % stride != 0 ? 1 : 0);
    res.times.reserve(static_cast<size_t>(nrec));
    res.qubit_excitation.resize(nrec, lay.qubit_count);
    res.mode_occupation.resize(nrec, lay.mode_count());

    VectorXcd psi = psi0.amplitudes;
    VectorXcd k1(lay.total_dim), k2(lay.total_dim), k3(lay.total_dim), k4(lay.total_dim),
        tmp(lay.total_dim), hx(lay.total_dim);
    detail::Coefficients c0, ch, c1;

    long rec = 0;
    auto record = [&](double t) {
        res.times.push_back(t);
        for (int i = 0; i < lay.qubit_count; ++i) {
            double p = 0.0;
            for (int k = 0; k < lay.total_dim; ++k)
                if (ctx.bit_of[i][static_cast<size_t>(k)]) p += std::norm(psi[k]);
            res.qubit_excitation(rec, i) = p;
        }
        for (int q = 0; q < lay.mode_count(); ++q) {
            double nq = 0.0, top = 0.0, top2 = 0.0;
            const int dimq = lay.mode_dims[q];
            for (int k = 0; k < lay.total_dim; ++k) {
                const int f = ctx.fock_of[q][static_cast<size_t>(k)];
                const double w = std::norm(psi[k]);
                nq += f * w;
                if (f == dimq - 1) top += w;
                if (f >= dimq - 2) top2 += w;
            }
            res.mode_occupation(rec, q) = nq;
            res.max_top_fock = std::max(res.max_top_fock, top);
            res.max_top_two_fock = std::max(res.max_top_two_fock, top2);
        }
        res.norm_drift = std::max(res.norm_drift, std::abs(psi.norm() - 1.0));
        if (opt.record_snapshots) {
            VectorXcd lab(lay.total_dim);
            for (int k = 0; k < lay.total_dim; ++k)
                lab[k] = psi[k] * std::exp(cd(0.0, -coeff.frame_phase(k, t)));
            res.snapshots.push_back(std::move(lab));
            res.snapshot_times.push_back(t);
        }
        ++rec;
    };

    record(0.0);
    double t = 0.0;
    for (long s = 0; s < n; ++s) {
        coeff.eval(t, c0);
        coeff.eval(t + 0.5 * dt, ch);
        coeff.eval(t + dt, c1);
        detail::apply_h(ctx, c0, psi, hx);
        k1 = cd(0.0, -1.0) * hx;
        tmp = psi + (0.5 * dt) * k1;
        detail::apply_h(ctx, ch, tmp, hx);
        k2 = cd(0.0, -1.0) * hx;
        tmp = psi + (0.5 * dt) * k2;
        detail::apply_h(ctx, ch, tmp, hx);
        k3 = cd(0.0, -1.0) * hx;
        tmp = psi + dt * k3;
        detail::apply_h(ctx, c1, tmp, hx);
        k4 = cd(0.0, -1.0) * hx;
        psi += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        t += dt;
        if ((s + 1) % stride == 0 || s == n - 1) record(t);
    }
    res.steps = n;
    if (res.norm_drift > opt.norm_tol)
        throw std::runtime_error("propagate: norm drift " + std::to_string(res.norm_drift) +
                                 " exceeds tolerance");
    if (opt.enforce_truncation && res.max_top_fock > opt.top_fock_tol)
        throw std::runtime_error("propagate: truncation overflow, top Fock population " +
                                 std::to_string(res.max_top_fock));

    StateVector fin{lay, VectorXcd(lay.total_dim)};
    for (int k = 0; k < lay.total_dim; ++k)
        fin.amplitudes[k] = psi[k] * std::exp(cd(0.0, -coeff.frame_phase(k, sched.duration)));
    res.final_state = std::move(fin);
    return res;
}

inline SimResult propagate_lindblad(const SystemSpec& spec, const ControlSchedule& sched,
                                    const DensityMatrix& rho0, const HeatingSpec& heating,
                                    const IntegratorOptions& opt = {}) {
    if (sched.duration <= 0.0) throw std::invalid_argument("propagate: duration must be > 0");
    const HilbertLayout& lay = rho0.layout;
    heating.validate(lay.mode_count());
    detail::PropagationContext ctx(spec, lay);
    detail::CoefficientEvaluator coeff(spec, sched, ctx);

    // Dissipators are frame-invariant: the transformation is diagonal in the
    // number basis, so D[a e^{-i phi}] = D[a]. Up and down jumps share the
    // rate gamma, pinning d<n>/dt = gamma for a free mode.
    struct Jump {
        SparseCd a, ad;
        Eigen::VectorXd n_diag, m_diag;  // a^dag a and a a^dag diagonals
        double gamma;
    };
    std::vector<Jump> jumps;
    for (int q = 0; q < lay.mode_count(); ++q) {
        if (heating.gamma[static_cast<size_t>(q)] == 0.0) continue;
        Jump j;
        j.a = build_mode_op(lay, q, ModeOpKind::a).mat;
        j.ad = build_mode_op(lay, q, ModeOpKind::a_dagger).mat;
        j.n_diag.resize(lay.total_dim);
        j.m_diag.resize(lay.total_dim);
        for (int k = 0; k < lay.total_dim; ++k) {
            const int f = ctx.fock_of[q][static_cast<size_t>(k)];
            j.n_diag[k] = f;
            j.m_diag[k] = f == lay.mode_dims[q] - 1 ? 0.0 : f + 1.0;
        }
        j.gamma = heating.gamma[static_cast<size_t>(q)];
        jumps.push_back(std::move(j));
    }

    const double wmax = coeff.max_phase_rate(sched.duration);
    long n = static_cast<long>(std::ceil(sched.duration * wmax / opt.phase_per_step));
    n = std::max(n, opt.min_steps);
    const double dt = sched.duration / double(n);

    SimResult res;
    const long stride = std::max<long>(1, n / std::max(1, opt.max_records - 1));
    const long nrec = n / stride + 1 + (n % stride != 0 ? 1 : 0);
    res.qubit_excitation.resize(nrec, lay.qubit_count);
    res.mode_occupation.resize(nrec, lay.mode_count());
    res.min_eigenvalue = 1.0;

    MatrixXcd rho = rho0.elements;
    MatrixXcd k1, k2, k3, k4, tmp, h_rho;
    detail::Coefficients cbuf;

    auto lindblad_rhs = [&](double time, const MatrixXcd& r, MatrixXcd& out) {
        coeff.eval(time, cbuf);
        // -i [H, r]
        out = MatrixXcd::Zero(lay.total_dim, lay.total_dim);
        for (size_t k = 0; k < ctx.terms.size(); ++k) {
            const auto& term = ctx.terms[k];
            out.noalias() += cbuf.rot[k] * (term.op * r);
            out.noalias() += std::conj(cbuf.rot[k]) * (term.op_dag * r);
            if (cbuf.cr[k] != cd(0.0)) {
                out.noalias() += cbuf.cr[k] * (term.cr * r);
                out.noalias() += std::conj(cbuf.cr[k]) * (term.cr_dag * r);
            }
        }
        h_rho = out - out.adjoint();  // H r - r H (H hermitian)
        out = cd(0.0, -1.0) * h_rho;
        for (const auto& j : jumps) {
            // D[a] + D[a^dag], both at rate gamma
            out.noalias() += j.gamma * (j.a * r * j.ad);
            out.noalias() += j.gamma * (j.ad * r * j.a);
            const Eigen::VectorXd tot = j.n_diag + j.m_diag;
            out.noalias() -= 0.5 * j.gamma * (tot.asDiagonal() * r).eval();
            out.noalias() -= 0.5 * j.gamma * (r * tot.asDiagonal()).eval();
        }
    };

    long rec = 0;
    auto record = [&](double time) {
        res.times.push_back(time);
        for (int i = 0; i < lay.qubit_count; ++i) {
            double p = 0.0;
            for (int k = 0; k < lay.total_dim; ++k)
                if (ctx.bit_of[i][static_cast<size_t>(k)]) p += rho(k, k).real();
            res.qubit_excitation(rec, i) = p;
        }
        for (int q = 0; q < lay.mode_count(); ++q) {
            double nq = 0.0, top = 0.0, top2 = 0.0;
            for (int k = 0; k < lay.total_dim; ++k) {
                const int f = ctx.fock_of[q][static_cast<size_t>(k)];
                const double w = rho(k, k).real();
                nq += f * w;
                if (f == lay.mode_dims[q] - 1) top += w;
                if (f >= lay.mode_dims[q] - 2) top2 += w;
            }
            res.mode_occupation(rec, q) = nq;
            res.max_top_fock = std::max(res.max_top_fock, top);
            res.max_top_two_fock = std::max(res.max_top_two_fock, top2);
        }
        res.trace_drift = std::max(res.trace_drift, std::abs(rho.trace().real() - 1.0));
        if (opt.check_positivity) {
            Eigen::SelfAdjointEigenSolver<MatrixXcd> es(rho, Eigen::EigenvaluesOnly);
            res.min_eigenvalue = std::min(res.min_eigenvalue, es.eigenvalues().minCoeff());
        }
        ++rec;
    };

    record(0.0);
    double t = 0.0;
    for (long s = 0; s < n; ++s) {
        lindblad_rhs(t, rho, k1);
        tmp = rho + (0.5 * dt) * k1;
        lindblad_rhs(t + 0.5 * dt, tmp, k2);
        tmp = rho + (0.5 * dt) * k2;
        lindblad_rhs(t + 0.5 * dt, tmp, k3);
        tmp = rho + dt * k3;
        lindblad_rhs(t + dt, tmp, k4);
        rho += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        t += dt;
        if ((s + 1) % stride == 0 || s == n - 1) record(t);
    }
    res.steps = n;
    if (res.trace_drift > opt.trace_tol)
        throw std::runtime_error("propagate_lindblad: trace drift exceeds tolerance");
    if (opt.check_positivity && res.min_eigenvalue < -1e-7)
        throw std::runtime_error("propagate_lindblad: positivity violated");
    if (opt.enforce_truncation && res.max_top_fock > opt.top_fock_tol)
        throw std::runtime_error("propagate_lindblad: truncation overflow, top Fock population " +
                                 std::to_string(res.max_top_fock));

    // rotate back to the lab frame
    MatrixXcd lab(lay.total_dim, lay.total_dim);
    for (int r = 0; r < lay.total_dim; ++r)
        for (int c2 = 0; c2 < lay.total_dim; ++c2)
            lab(r, c2) = rho(r, c2) * std::exp(cd(0.0, -coeff.frame_phase(r, sched.duration) +
                                                          coeff.frame_phase(c2, sched.duration)));
    res.final_rho = DensityMatrix{lay, std::move(lab)};
    return res;
}

} // namespace dpql
