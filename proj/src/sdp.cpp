#include "bcsg/sdp.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace bcsg {

Eigen::MatrixXd SdpProblem::constant() const {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    for (const auto& e : f0) {
        m(e.i, e.j) = e.value;
        m(e.j, e.i) = e.value;
    }
    return m;
}

Eigen::MatrixXd SdpProblem::matrix(int var) const {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    for (const auto& e : fs[(size_t)var]) {
        m(e.i, e.j) = e.value;
        m(e.j, e.i) = e.value;
    }
    return m;
}

namespace {

struct FullEntry {
    int p, q;
    double c;
};

// Expand an upper-triangle list into all (row, col) entries.
std::vector<FullEntry> expand(const std::vector<SdpEntry>& sparse) {
    std::vector<FullEntry> out;
    out.reserve(2 * sparse.size());
    for (const auto& e : sparse) {
        out.push_back({e.i, e.j, e.value});
        if (e.i != e.j) out.push_back({e.j, e.i, e.value});
    }
    return out;
}

double inner(const std::vector<FullEntry>& a, const Eigen::MatrixXd& m) {
    double s = 0;
    for (const auto& e : a) s += e.c * m(e.p, e.q);
    return s;
}

// Largest alpha in (0,1] with P + alpha dP staying positive definite,
// via the minimum eigenvalue of L^-1 dP L^-T.
double max_step(const Eigen::LLT<Eigen::MatrixXd>& llt, const Eigen::MatrixXd& dP) {
    Eigen::MatrixXd L = llt.matrixL();
    Eigen::MatrixXd W = L.triangularView<Eigen::Lower>().solve(dP);
    W = L.triangularView<Eigen::Lower>().solve(W.transpose()).transpose();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (W + W.transpose()),
                                                      Eigen::EigenvaluesOnly);
    double lmin = es.eigenvalues().minCoeff();
    if (lmin >= -1e-13) return 1.0;
    return std::min(1.0, -1.0 / lmin);
}

}  // namespace

SdpSolution solve_sdp(const SdpProblem& p, double tol, int max_iter) {
    if (tol < 1e-10 || tol > 1e-4) throw std::invalid_argument("tol outside [1e-10, 1e-4]");
    const int n = p.n;
    const int m = p.num_vars();
    SdpSolution sol;
    sol.y.assign((size_t)m, 0.0);

    Eigen::MatrixXd C = p.constant();
    if (m == 0) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(C, Eigen::EigenvaluesOnly);
        sol.status = es.eigenvalues().minCoeff() >= -1e-9 ? SdpStatus::Converged
                                                          : SdpStatus::NumericalFailure;
        sol.primal_value = sol.dual_value = 0.0;
        return sol;
    }

    // max b^T y s.t. C - sum y_i Atil_i >= 0 with Atil_i = -F_i.
    std::vector<std::vector<FullEntry>> A((size_t)m);
    for (int k = 0; k < m; ++k) {
        A[(size_t)k] = expand(p.fs[(size_t)k]);
        for (auto& e : A[(size_t)k]) e.c = -e.c;
    }
    Eigen::VectorXd b(m);
    for (int k = 0; k < m; ++k) b(k) = p.b[(size_t)k];

    double scale = std::max({1.0, std::sqrt((double)n), C.norm()});
    for (int k = 0; k < m; ++k) {
        double nf = 0;
        for (const auto& e : A[(size_t)k]) nf += e.c * e.c;
        scale = std::max(scale, std::sqrt(nf));
    }
    Eigen::MatrixXd X = scale * Eigen::MatrixXd::Identity(n, n);
    Eigen::MatrixXd S = scale * Eigen::MatrixXd::Identity(n, n);
    Eigen::VectorXd y = Eigen::VectorXd::Zero(m);

    auto dual_slack = [&](const Eigen::VectorXd& yy) {
        Eigen::MatrixXd D = C;
        for (int k = 0; k < m; ++k)
            for (const auto& e : A[(size_t)k]) D(e.p, e.q) -= yy(k) * e.c;
        return D;
    };

    double bnorm = 1.0 + b.lpNorm<Eigen::Infinity>();
    double cnorm = 1.0 + C.norm();

    Eigen::MatrixXd M(m, m);
    for (int iter = 1; iter <= max_iter; ++iter) {
        Eigen::LLT<Eigen::MatrixXd> lltX(X), lltS(S);
        if (lltX.info() != Eigen::Success || lltS.info() != Eigen::Success) {
            sol.status = SdpStatus::NumericalFailure;
            sol.iterations = iter;
            return sol;
        }
        Eigen::MatrixXd Sinv = lltS.solve(Eigen::MatrixXd::Identity(n, n));

        Eigen::VectorXd rp(m);
        for (int k = 0; k < m; ++k) rp(k) = b(k) - inner(A[(size_t)k], X);
        Eigen::MatrixXd Rd = dual_slack(y) - S;
        double mu = (X.cwiseProduct(S)).sum() / n;

        double pv = b.dot(y);
        double dv = (C.cwiseProduct(X)).sum();
        double relgap = std::abs(pv - dv) / (1.0 + std::abs(pv) + std::abs(dv));
        double fp = rp.lpNorm<Eigen::Infinity>() / bnorm;
        double fd = Rd.norm() / cnorm;
        sol.primal_value = pv;
        sol.dual_value = dv;
        sol.gap = relgap;
        sol.feas_primal = fp;
        sol.feas_dual = fd;
        sol.iterations = iter;
        for (int k = 0; k < m; ++k) sol.y[(size_t)k] = y(k);
        if (relgap <= tol && fp <= tol && fd <= tol) {
            sol.status = SdpStatus::Converged;
            return sol;
        }

        // Schur complement M_kl = tr(A_k X A_l Sinv)
        for (int k = 0; k < m; ++k)
            for (int l = k; l < m; ++l) {
                double s = 0;
                for (const auto& e : A[(size_t)k])
                    for (const auto& f : A[(size_t)l]) s += e.c * f.c * X(e.q, f.p) * Sinv(f.q, e.p);
                M(k, l) = s;
                M(l, k) = s;
            }
        for (int k = 0; k < m; ++k) M(k, k) += 1e-13 * (1.0 + M(k, k));

        Eigen::LDLT<Eigen::MatrixXd> ldlt(M);
        if (ldlt.info() != Eigen::Success) {
            sol.status = SdpStatus::NumericalFailure;
            return sol;
        }

        Eigen::MatrixXd XRdSinv = X * Rd * Sinv;
        auto solve_direction = [&](double sigma_mu, const Eigen::MatrixXd* corr,
                                   Eigen::VectorXd& dy, Eigen::MatrixXd& dX, Eigen::MatrixXd& dS) {
            Eigen::VectorXd rhs(m);
            for (int k = 0; k < m; ++k) {
                double v = b(k) + inner(A[(size_t)k], XRdSinv) - sigma_mu * inner(A[(size_t)k], Sinv);
                if (corr) v += inner(A[(size_t)k], *corr);
                rhs(k) = v;
            }
            dy = ldlt.solve(rhs);
            dS = Rd;
            for (int k = 0; k < m; ++k)
                for (const auto& e : A[(size_t)k]) dS(e.p, e.q) -= dy(k) * e.c;
            dX = sigma_mu * Sinv - X - X * dS * Sinv;
            if (corr) dX -= *corr;
            dX = 0.5 * (dX + dX.transpose()).eval();
        };

        // predictor
        Eigen::VectorXd dy_a;
        Eigen::MatrixXd dX_a, dS_a;
        solve_direction(0.0, nullptr, dy_a, dX_a, dS_a);
        double ap = max_step(lltX, dX_a);
        double ad = max_step(lltS, dS_a);
        double mu_aff =
            ((X + ap * dX_a).cwiseProduct(S + ad * dS_a)).sum() / n;
        double sigma = std::pow(std::max(0.0, mu_aff / mu), 3.0);
        sigma = std::min(1.0, std::max(1e-8, sigma));

        // corrector
        Eigen::MatrixXd corr = dX_a * dS_a * Sinv;
        Eigen::VectorXd dy;
        Eigen::MatrixXd dX, dS;
        solve_direction(sigma * mu, &corr, dy, dX, dS);

        double tau = 0.98;
        double alpha_p = tau * max_step(lltX, dX);
        double alpha_d = tau * max_step(lltS, dS);
        alpha_p = std::min(alpha_p, 1.0);
        alpha_d = std::min(alpha_d, 1.0);

        X += alpha_p * dX;
        y += alpha_d * dy;
        S += alpha_d * dS;
    }
    sol.status = SdpStatus::MaxIterations;
    return sol;
}

std::string export_sdpa(const SdpProblem& p) {
    std::ostringstream os;
    char buf[64];
    os << p.num_vars() << "\n";
    os << 1 << "\n";
    os << p.n << "\n";
    for (int k = 0; k < p.num_vars(); ++k) {
        snprintf(buf, sizeof buf, "%.17g", -p.b[(size_t)k]);
        os << (k ? " " : "") << buf;
    }
    os << "\n";
    auto emit = [&](int matno, const std::vector<SdpEntry>& entries) {
        for (const auto& e : entries) {
            // SDPA stores X(y) = sum y_i F_i - F0 >= 0; our constant F0 enters negated.
            double v = matno == 0 ? -e.value : e.value;
            if (v == 0.0) continue;
            snprintf(buf, sizeof buf, "%d 1 %d %d %.17g", matno, e.i + 1, e.j + 1, v);
            os << buf << "\n";
        }
    };
    emit(0, p.f0);
    for (int k = 0; k < p.num_vars(); ++k) emit(k + 1, p.fs[(size_t)k]);
    return os.str();
}

SdpProblem parse_sdpa(const std::string& text) {
    std::istringstream is(text);
    std::string line;
    auto next_data_line = [&](std::string& out) {
        while (std::getline(is, line)) {
            size_t pos = line.find_first_not_of(" \t\r");
            if (pos == std::string::npos) continue;
            if (line[pos] == '"' || line[pos] == '*' || line[pos] == '#') continue;
            out = line;
            return true;
        }
        return false;
    };
    SdpProblem p;
    std::string l;
    if (!next_data_line(l)) throw std::runtime_error("sdpa: missing mDIM");
    int m = std::stoi(l);
    if (!next_data_line(l)) throw std::runtime_error("sdpa: missing nBLOCK");
    int nblock = std::stoi(l);
    if (nblock != 1) throw std::runtime_error("sdpa: only single-block problems supported");
    if (!next_data_line(l)) throw std::runtime_error("sdpa: missing block sizes");
    p.n = std::stoi(l);
    if (!next_data_line(l)) throw std::runtime_error("sdpa: missing objective");
    {
        std::istringstream os(l);
        double v;
        while (os >> v) p.b.push_back(-v);
        if ((int)p.b.size() != m) throw std::runtime_error("sdpa: objective length mismatch");
    }
    p.fs.resize((size_t)m);
    std::string data;
    while (next_data_line(data)) {
        std::istringstream es(data);
        int matno, blk, i, j;
        double v;
        if (!(es >> matno >> blk >> i >> j >> v)) throw std::runtime_error("sdpa: bad entry line");
        SdpEntry e{i - 1, j - 1, matno == 0 ? -v : v};
        if (e.i > e.j) std::swap(e.i, e.j);
        if (matno == 0)
            p.f0.push_back(e);
        else
            p.fs.at((size_t)matno - 1).push_back(e);
    }
    return p;
}

}  // namespace bcsg
