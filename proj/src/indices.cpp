#include "jacspec/indices.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <future>
#include <limits>
#include <thread>

#include "jacspec/criteria.hpp"

namespace jacspec {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kMaxExp = 700.0;

double guarded_exp(double x, const char* what) {
    if (x > kMaxExp) throw Error(ErrorKind::Overflow, std::string(what) + ": exp(" + std::to_string(x) + ")");
    return std::exp(x);
}

double normalize(Block& m) {
    const double mx = m.cwiseAbs().maxCoeff();
    if (mx == 0.0 || !std::isfinite(mx)) return 0.0;
    m /= mx;
    return std::log(mx);
}

/// Thin QR of a stacked 2p x p block; returns (Q, R).
std::pair<Block, Block> thin_qr(const Block& x) {
    const Eigen::Index p = x.cols();
    Eigen::HouseholderQR<Block> qr(x);
    Block r = qr.matrixQR().topRows(p).triangularView<Eigen::Upper>();
    Block q = qr.householderQ() * Block::Identity(x.rows(), p);
    return {q, r};
}

double log_expm1(double x) {
    if (x > 50) return x + std::log1p(-std::exp(-x));
    return std::log(std::expm1(x));
}

/// log(e^x - 1) and log(1 - e^{-x}) from log x; exact to first order once x underflows.
double log_expm1_at(double log_x) { return log_x < -30 ? log_x : log_expm1(std::exp(log_x)); }
double log_one_minus_exp_neg_at(double log_x) {
    return log_x < -30 ? log_x : std::log(-std::expm1(-std::exp(log_x)));
}

template <class F>
auto run_parallel(std::size_t count, F f) {
    using R = decltype(f(std::size_t{0}));
    std::vector<R> out(count);
    const std::size_t workers = std::max<std::size_t>(1, static_cast<std::size_t>(worker_threads()));
    if (workers == 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) out[i] = f(i);
        return out;
    }
    std::size_t next = 0;
    while (next < count) {
        std::vector<std::future<R>> batch;
        for (std::size_t w = 0; w < workers && next < count; ++w, ++next)
            batch.push_back(std::async(std::launch::async, f, next));
        const std::size_t base = next - batch.size();
        for (std::size_t i = 0; i < batch.size(); ++i) out[base + i] = batch[i].get();
    }
    return out;
}

}  // namespace

int worker_threads() {
    if (const char* env = std::getenv("JACSPEC_THREADS")) {
        const int v = std::atoi(env);
        if (v > 0) return v;
    }
    const unsigned hc = std::thread::hardware_concurrency();
    return hc > 0 ? static_cast<int>(hc) : 1;
}

ScaledGram::ScaledGram(int p)
    : W(Block::Zero(p, p)), kinv(Block::Identity(p, p)), k(Block::Identity(p, p)) {}

void ScaledGram::add(const Block& frame_increment, double log_factor) {
    const double mi = frame_increment.cwiseAbs().maxCoeff();
    if (mi == 0.0) return;
    const double mw = W.cwiseAbs().maxCoeff();
    if (mw == 0.0) {
        W = frame_increment / mi;
        log_w = std::log(mi) + log_factor;
        return;
    }
    const double lw = std::log(mw) + log_w, li = std::log(mi) + log_factor;
    const double L = std::max(lw, li);
    W = std::exp(log_w - L) * W + std::exp(log_factor - L) * frame_increment;
    log_w = L;
}

void ScaledGram::rebase(const Block& R) {
    Block rinv = inv(R);
    W = rinv.adjoint() * W * rinv;
    W = (W + W.adjoint()).eval() * 0.5;
    log_w += normalize(W);
    kinv = kinv * rinv;
    log_kinv += normalize(kinv);
    k = R * k;
    log_k += normalize(k);
}

void ScaledGram::scale(double log_factor) {
    log_w -= 2.0 * log_factor;
    log_k += log_factor;
    log_kinv -= log_factor;
}

std::vector<double> ScaledGram::inverse_log_eigs() const {
    const int p = static_cast<int>(W.rows());
    HermEigResult e = herm_eig((W + W.adjoint()) * 0.5);
    const double top = std::max(e.eigenvalues.maxCoeff(), 0.0);
    RealVec w(p);
    for (int i = 0; i < p; ++i) {
        const double lam = e.eigenvalues(i);
        w(i) = lam > 1e-300 && lam > 1e-15 * top ? 1.0 / std::sqrt(lam) : 1.0 / std::sqrt(std::max(1e-15 * top, 1e-300));
    }
    Block m = kinv * e.vectors * w.asDiagonal();
    RealVec s = singular_values(m);
    std::vector<double> out(p);
    for (int i = 0; i < p; ++i) out[i] = s(i) > 0 ? 2.0 * (std::log(s(i)) + log_kinv) - log_w : kNegInf;
    return out;
}

std::pair<Block, double> ScaledGram::gram() const {
    Block g = k.adjoint() * W * k;
    g = (g + g.adjoint()).eval() * 0.5;
    double ls = 2.0 * log_k + log_w;
    ls += normalize(g);
    return {g, ls};
}

KreinState krein_init(const BlockJacobiMatrix& J, cplx z) {
    const int p = J.p();
    KreinState s{z, 0, Block::Zero(p, p), Block::Identity(p, p), 0.0, 0.0, ScaledGram(p), 0.0};
    s.kernel.add(Block::Identity(p, p));
    return s;
}

void krein_advance(KreinState& s, const BlockJacobiMatrix& J) {
    const std::size_t n = s.n;
    const int p = J.p();
    const ScaledBlock A = J.diag_scaled(n);
    const ScaledBlock B = J.offdiag_scaled(n);
    const Block binv = inv(B.m);

    // Exponents of the three terms relative to |B_n|; a common shift L keeps them representable.
    const double ez = s.log_curr - B.log_scale, ea = s.log_curr + A.log_scale - B.log_scale;
    double eb = kNegInf;
    ScaledBlock Bp{Block::Zero(p, p), 0.0};
    if (n > 0) {
        Bp = J.offdiag_scaled(n - 1);
        eb = s.log_prev + Bp.log_scale - B.log_scale;
    }
    const double L = std::max({ez, ea, eb});
    Block t_z = (s.z * std::exp(ez - L)) * s.P_curr;
    Block t_a = std::exp(ea - L) * (A.m * s.P_curr);
    Block t_b = Block::Zero(p, p);
    if (n > 0) t_b = std::exp(eb - L) * (Bp.m.adjoint() * s.P_prev);
    Block next = binv * (t_z - t_a - t_b);

    // (LU) residual in the frame scaled by exp(-log|B_n| - L)
    Block t_n = B.m * next;
    const double denom = t_b.norm() + t_a.norm() + t_n.norm() + t_z.norm();
    s.last_residual = denom > 0 ? (t_b + t_a + t_n - t_z).norm() / denom : 0.0;

    // true P_{n+1} = exp(L) next K
    s.kernel.add(next.adjoint() * next, 2.0 * L);
    const double M = std::max(L, s.log_curr);
    Block stacked(2 * p, p);
    stacked << std::exp(s.log_curr - M) * s.P_curr, std::exp(L - M) * next;
    auto [q, r] = thin_qr(stacked);
    // new frame K' = exp(M) R K; each block keeps its own scale so neither underflows
    const Block rinv = inv(r);
    Block prev = s.P_curr * rinv;
    Block curr = next * rinv;
    s.log_prev = s.log_curr - M + normalize(prev);
    s.log_curr = L - M + normalize(curr);
    s.P_prev = prev;
    s.P_curr = curr;
    s.kernel.rebase(r);
    s.kernel.scale(M);
    s.n = n + 1;
}

KreinState krein_step(const KreinState& state, const BlockJacobiMatrix& J) {
    KreinState s = state;
    krein_advance(s, J);
    return s;
}

Block krein_true_P(const KreinState& s) {
    return s.P_curr * s.kernel.k * guarded_exp(s.log_curr + s.kernel.log_k, "unscaled P_n");
}

KernelPartial kernel_partial(const BlockJacobiMatrix& J, cplx z, std::size_t N) {
    KreinState s = krein_init(J, z);
    for (std::size_t i = 0; i < N; ++i) krein_advance(s, J);
    auto [g, ls] = s.kernel.gram();
    return {g, ls};
}

std::vector<std::size_t> ladder_schedule(const IndexOptions& opt) {
    if (!opt.ladder.empty()) return opt.ladder;
    std::vector<std::size_t> out;
    for (int k = 4; k <= opt.ladder_max_pow; ++k) out.push_back(std::size_t{1} << k);
    return out;
}

PointEstimate classify_ladder(cplx z, std::vector<LadderRung> ladder, double log_reference, const IndexOptions& opt) {
    PointEstimate pe;
    pe.z = z;
    pe.ladder = std::move(ladder);
    const std::size_t L = pe.ladder.size();
    if (L < 2) return pe;
    const double log_floor = std::log(opt.tol) + log_reference;
    const double log_ratio = std::log(opt.survive_ratio);

    auto surviving = [&](const LadderRung& a, const LadderRung& b, std::vector<bool>* flags) {
        int count = 0;
        for (std::size_t k = 0; k < b.log_eigs.size(); ++k) {
            const double la = a.log_eigs[k], lb = b.log_eigs[k];
            const bool ok = std::isfinite(lb) && std::isfinite(la) && lb - la > log_ratio && lb > log_floor;
            if (flags) flags->push_back(ok);
            count += ok ? 1 : 0;
        }
        return count;
    };

    std::vector<bool> flags;
    pe.rank = surviving(pe.ladder[L - 2], pe.ladder[L - 1], &flags);
    if (L < 3) return pe;
    const int prev_rank = surviving(pe.ladder[L - 3], pe.ladder[L - 2], nullptr);
    bool stable = prev_rank == pe.rank;
    for (std::size_t k = 0; k < flags.size() && stable; ++k) {
        if (!flags[k]) continue;
        const double rel = std::abs(std::expm1(pe.ladder[L - 1].log_eigs[k] - pe.ladder[L - 2].log_eigs[k]));
        if (!(rel < opt.stable_rel)) stable = false;
    }
    pe.stabilized = stable;
    return pe;
}

PointEstimate estimate_point(const BlockJacobiMatrix& J, cplx z, const IndexOptions& opt) {
    const std::vector<std::size_t> schedule = ladder_schedule(opt);
    const std::size_t n_max = schedule.empty() ? 0 : schedule.back();
    KreinState s = krein_init(J, z);
    std::vector<LadderRung> ladder;
    double log_ref = 0.0;
    double max_res = 0.0;
    std::size_t next_rung = 0;
    while (s.n < n_max) {
        krein_advance(s, J);
        max_res = std::max(max_res, s.last_residual);
        if (s.n == 1) log_ref = s.kernel.inverse_log_eigs().front();
        if (next_rung < schedule.size() && s.n == schedule[next_rung]) {
            ladder.push_back({s.n, s.kernel.inverse_log_eigs()});
            ++next_rung;
        }
    }
    PointEstimate pe = classify_ladder(z, std::move(ladder), log_ref, opt);
    pe.max_residual = max_res;
    return pe;
}

IndexEstimate estimate_index(const BlockJacobiMatrix& J, const IndexOptions& opt) {
    IndexEstimate est;
    est.method = "krein-kernel";
    est.z_points = opt.z_points;
    for (cplx z : opt.z_points)
        if (z.imag() == 0.0) throw Error(ErrorKind::Bounds, "estimate_index needs non-real z points");
    J.warm(ladder_schedule(opt).empty() ? 0 : ladder_schedule(opt).back() + 1);
    est.points = run_parallel(opt.z_points.size(),
                              [&](std::size_t i) { return estimate_point(J, opt.z_points[i], opt); });
    int up = -1, lo = -1;
    bool stable = true, agree = true;
    for (const PointEstimate& pe : est.points) {
        stable = stable && pe.stabilized;
        int& slot = pe.z.imag() > 0 ? up : lo;
        if (slot >= 0 && slot != pe.rank) agree = false;
        slot = std::max(slot, pe.rank);
    }
    if (up < 0 && lo < 0) throw Error(ErrorKind::Bounds, "estimate_index needs at least one z point");
    if (up < 0) {
        up = lo;
        est.note = "no point in the upper half-plane; n_+ copied from n_-";
    }
    if (lo < 0) {
        lo = up;
        est.note = "no point in the lower half-plane; n_- copied from n_+";
    }
    if (!agree) est.note = "z points in the same half-plane disagree";
    est.n_plus = up;
    est.n_minus = lo;
    est.stabilized = stable && agree;
    return est;
}

DefectSolution dirac_defect_recursion(const InteractionModel& m, long n_max, const std::vector<std::size_t>& ladder) {
    m.validate();
    if (!m.alpha && !m.beta) throw Error(ErrorKind::ModelMismatch, "defect recursion needs alpha or beta");
    const int p = m.p;
    const double c = m.c;
    const bool use_beta = !m.alpha;
    DefectSolution sol;
    sol.uses_beta = use_beta;

    // U_1 = e^{d_1/c} I, V_1 = e^{-d_1/c} I with the scalar e^{d_1/c} moved into the frame.
    double d_cur = m.d.eval(1);
    Block U = Block::Identity(p, p);
    Block V = guarded_exp(-2.0 * d_cur / c, "initial data") * Block::Identity(p, p) +
              Block::Zero(p, p);
    ScaledGram frame(p);
    frame.scale(d_cur / c);
    {
        Block stacked(2 * p, p);
        stacked << U, V;
        auto [q, r] = thin_qr(stacked);
        U = q.topRows(p);
        V = q.bottomRows(p);
        frame.rebase(r);
    }

    double log_bound = d_cur / c;
    std::vector<double> log_terms;
    log_terms.reserve(static_cast<std::size_t>(n_max));
    CompensatedSum l2;
    std::size_t next_rung = 0;
    const cplx I(0.0, 1.0);

    for (long n = 1; n <= n_max; ++n) {
        DefectStep st;
        st.n = n;
        const Block Ut = U * frame.k;
        const Block Vt = V * frame.k;
        st.log_norm_U = frame.log_k + std::log(spec_norm(Ut));
        st.log_norm_V = frame.log_k + std::log(spec_norm(Vt));
        st.log_bound = log_bound;

        // interval integral c(|U_n|^2 (1 - e^{-2d/c}) + |V_n|^2 (e^{2d/c} - 1))
        const double x = 2.0 * d_cur / c;
        const double log_x = std::log(2.0) + m.log_d(n) - std::log(c);
        const double a = log_one_minus_exp_neg_at(log_x), b = log_expm1_at(log_x);
        const double lu = std::log(Ut.squaredNorm()) + a;
        const double lv = std::log(Vt.squaredNorm()) + b;
        st.log_l2_term = std::log(c) + 2.0 * frame.log_k + log_add(lu, lv);
        log_terms.push_back(st.log_l2_term);
        if (std::isfinite(st.log_l2_term) && st.log_l2_term < kMaxExp) l2.add(std::exp(st.log_l2_term));

        if (x > 2.0 * kMaxExp) throw Error(ErrorKind::Overflow, "interval length overflows the Gram weights");
        const double ab = std::max(a, b);
        frame.add(std::exp(a - ab) * (U.adjoint() * U) + std::exp(b - ab) * (V.adjoint() * V), std::log(c) + ab);
        if (next_rung < ladder.size() && static_cast<std::size_t>(n) == ladder[next_rung]) {
            sol.gram_ladder.push_back({static_cast<std::size_t>(n), frame.inverse_log_eigs()});
            ++next_rung;
        }

        if (n == n_max) {
            st.rank_witness = sol.steps.empty() ? 1.0 : sol.steps.back().rank_witness;
            sol.steps.push_back(st);
            break;
        }

        // step n -> n+1
        const double d_next = m.d.eval(n + 1);
        const double e2 = guarded_exp(2.0 * d_next / c, "interval weight");
        // large interaction strengths: the factor exp(shift) is moved into the frame
        const ScaledBlock strength = use_beta ? m.beta->at_scaled(n, p) : m.alpha->at_scaled(n, p);
        const double shift = std::max(0.0, strength.log_scale);
        const double es = std::exp(-shift), ws = std::exp(strength.log_scale - shift);
        Block S = use_beta ? Block(U - V) : Block(U + V);
        Block G = use_beta ? Block((I * (c / 2.0 * ws)) * strength.m * S) : Block((I * (ws / (2.0 * c))) * strength.m * S);
        Block Un = use_beta ? Block(es * U + G) : Block(es * U - G);
        Block Vn_e2 = es * V + G;  // V_{n+1} e^{2 d_{n+1}/c} in the scaled frame
        Block Vn = Vn_e2 / e2;

        Block cont, jump;
        if (!use_beta) {
            cont = Un + Vn_e2 - es * (U + V);
            jump = Un - Vn_e2 - es * (U - V) + (I * (ws / c)) * strength.m * (U + V);
        } else {
            cont = Un - Vn_e2 - es * (U - V);
            jump = Un + Vn_e2 - es * (U + V) - (I * (c * ws)) * strength.m * (U - V);
        }
        const double scale = es * (U.norm() + V.norm()) + Un.norm() + Vn_e2.norm();
        st.residual = scale > 0 ? std::max(cont.norm(), jump.norm()) / scale : 0.0;

        Block stacked(2 * p, p);
        stacked << Un, Vn;
        RealVec sv = singular_values(stacked);
        st.rank_witness = sv(0) > 0 ? sv(sv.size() - 1) / sv(0) : 0.0;
        sol.steps.push_back(st);
        sol.min_rank_witness = std::min(sol.min_rank_witness, st.rank_witness);
        sol.max_residual = std::max(sol.max_residual, st.residual);

        frame.scale(d_next / c + shift);
        auto [q, r] = thin_qr(stacked);
        U = q.topRows(p);
        V = q.bottomRows(p);
        frame.rebase(r);

        const double sn = spec_norm(strength.m);
        const double log_strength = sn > 0 ? std::log(sn) + strength.log_scale + (use_beta ? 1.0 : -1.0) * std::log(c) : kNegInf;
        log_bound += d_next / c + log_add(0.0, log_strength);
        d_cur = d_next;
    }
    sol.partial_l2 = l2.value();
    sol.tail = series_probe(log_terms);
    return sol;
}

std::pair<Block, Block> defect_true_UV(const InteractionModel& m, long n) {
    const int p = m.p;
    const double c = m.c;
    const bool use_beta = !m.alpha;
    const cplx I(0.0, 1.0);
    Block U = std::exp(m.d.eval(1) / c) * Block::Identity(p, p);
    Block V = std::exp(-m.d.eval(1) / c) * Block::Identity(p, p);
    for (long k = 1; k < n; ++k) {
        const double dn = m.d.eval(k + 1);
        Block strength = use_beta ? m.beta->at(k, p) : m.alpha->at(k, p);
        Block S = use_beta ? Block(U - V) : Block(U + V);
        Block G = use_beta ? Block((I * (c / 2.0)) * strength * S) : Block((I / (2.0 * c)) * strength * S);
        Block Un = (use_beta ? Block(U + G) : Block(U - G)) * std::exp(dn / c);
        Block Vn = (V + G) * std::exp(-dn / c);
        U = Un;
        V = Vn;
    }
    return {U, V};
}

IndexEstimate dirac_index_estimate(const InteractionModel& m, long n_max, const IndexOptions& opt) {
    std::vector<std::size_t> schedule;
    for (std::size_t N : ladder_schedule(opt))
        if (static_cast<long>(N) <= n_max) schedule.push_back(N);
    if (schedule.empty() || static_cast<long>(schedule.back()) != n_max) schedule.push_back(static_cast<std::size_t>(n_max));

    DefectSolution sol = dirac_defect_recursion(m, n_max, schedule);
    IndexEstimate est;
    est.method = sol.uses_beta ? "dirac-defect-beta" : "dirac-defect-alpha";
    const double log_ref = sol.gram_ladder.empty() ? 0.0 : sol.gram_ladder.front().log_eigs.front();
    PointEstimate pe = classify_ladder(cplx(0, 1), sol.gram_ladder, log_ref, opt);
    pe.max_residual = sol.max_residual;

    const bool full_rank = sol.min_rank_witness > 1e-8;
    if (sol.tail.state == SeriesState::ConvergedNumerically && full_rank) {
        est.n_plus = est.n_minus = m.p;
        est.stabilized = true;
        est.note = "l2 tail converges; all defect solutions square integrable";
    } else if (sol.tail.state == SeriesState::DivergingNumerically) {
        est.n_plus = est.n_minus = std::min(pe.rank, m.p - 1);
        est.stabilized = pe.stabilized && pe.rank < m.p;
        est.note = "l2 tail diverges; index read from the inverse Gram ladder";
    } else {
        est.n_plus = est.n_minus = pe.rank;
        est.stabilized = false;
        est.note = "l2 tail inconclusive";
    }
    pe.rank = est.n_plus;
    pe.stabilized = est.stabilized;
    est.points.push_back(std::move(pe));
    est.z_points = {cplx(0, 1)};
    return est;
}

IndexEstimate dyukarev_dirac_route(int p, int p1, double c, long n_max, const IndexOptions& opt) {
    if (p < 1 || p1 < 0 || p1 > p) throw Error(ErrorKind::Bounds, "dyukarev needs 0 <= p1 <= p");
    IndexEstimate est;
    est.method = "dyukarev-beta-route";
    est.stabilized = true;
    if (p1 > 0) {
        InteractionModel m;
        m.p = p1;
        m.c = c;
        m.d = ScalarSequence::dyukarev_d(c, -1);
        m.beta = BlockSequence::scaled_identity(m.d, -1.0);
        IndexEstimate upper = dirac_index_estimate(m, n_max, opt);
        est.n_plus += upper.n_plus;
        est.n_minus += upper.n_minus;
        est.stabilized = est.stabilized && upper.stabilized;
        est.points = upper.points;
        est.note = "upper block: " + upper.note;
    }
    if (p - p1 > 0) {
        CriterionReport car = carleman(make_dyukarev(p - p1, 0), 10000);
        if (car.verdict != Verdict::Satisfied) {
            est.stabilized = false;
            est.note += "; lower block: Carleman test not decided";
        } else {
            est.note += "; lower block selfadjoint by the Carleman test";
        }
    }
    est.z_points = {cplx(0, 1)};
    return est;
}

}  // namespace jacspec
