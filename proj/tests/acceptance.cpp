#include "support.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <sys/wait.h>

using namespace gfmodes;
namespace ts = testing_support;

namespace {

struct Outcome {
    bool pass;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point t0)
{
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

Eigen::MatrixXd sym_sqrt(const Eigen::MatrixXd& a)
{
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
    return es.eigenvectors() * es.eigenvalues().cwiseSqrt().asDiagonal() * es.eigenvectors().transpose();
}

std::string fmt(const char* f, double a, double b = 0.0)
{
    char buf[160];
    std::snprintf(buf, sizeof buf, f, a, b);
    return buf;
}

Outcome two_mass_regression()
{
    const auto t0 = Clock::now();
    const Molecule mol({Atom{"m1", 1.0, {0, 0, 0}}, Atom{"m2", 1.0, {1, 0, 0}}}, 1);
    const BMatrix b = build_b_matrix(mol, {CartesianDisplacement{0, 0}, CartesianDisplacement{1, 0}});
    const MassMatrix mm = mass_matrix(mol);
    Eigen::Matrix2d f;
    f << 2, -1, -1, 2;
    const NormalModeResult r = with_cartesian(solve(build_g_matrix(b, mm), {SymMatrix(f), std::nullopt}), b, mm);
    const double ms = elapsed_ms(t0);
    const double ef = std::max(std::abs(r.frequencies(0) - 1.0), std::abs(r.frequencies(1) / std::sqrt(3.0) - 1.0));
    Eigen::Matrix2d lref;
    lref << 1, 1, 1, -1;
    lref /= std::sqrt(2.0);
    double el = 0.0;
    for (int c = 0; c < 2; ++c)
        el = std::max(el, std::min((r.L.col(c) - lref.col(c)).norm(), (r.L.col(c) + lref.col(c)).norm()));
    const double eo = (r.l.transpose() * r.l - Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff();
    return {ef < 1e-10 && el < 1e-10 && eo < 1e-10 && ms < 10.0,
        fmt("freq rel %.1e, ", ef) + fmt("L %.1e, ", el) + fmt("l^T l %.1e, ", eo) + fmt("%.3f ms", ms)};
}

Outcome gf_invariants()
{
    const auto t0 = Clock::now();
    std::mt19937 rng(2024);
    double worst_norm = 0.0, worst_diag = 0.0, worst_w = 0.0;
    for (int t = 0; t < 100; ++t) {
        const int n = 1 + t % 12;
        const Eigen::MatrixXd g = ts::random_spd(n, rng), f = ts::random_spd(n, rng);
        const NormalModeResult r = solve(SymMatrix(g), {SymMatrix(f), std::nullopt});
        const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
        worst_norm = std::max(worst_norm, (r.L.transpose() * g.inverse() * r.L - id).cwiseAbs().maxCoeff());
        const Eigen::MatrixXd lam = r.L.inverse() * g * f * r.L;
        worst_diag = std::max(worst_diag, (lam - Eigen::MatrixXd(r.lambdas.asDiagonal())).cwiseAbs().maxCoeff());
        // W = G^1/2 F G^1/2 shares the spectrum of GF
        const Eigen::MatrixXd h = sym_sqrt(g);
        const Eigen::VectorXd w = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(h * f * h).eigenvalues();
        worst_w = std::max(worst_w, (w - r.lambdas).cwiseAbs().maxCoeff());
    }
    const double ms = elapsed_ms(t0);
    return {worst_norm < 1e-9 && worst_diag < 1e-9 && worst_w < 1e-9 && ms < 1000.0,
        fmt("L^T G^-1 L %.1e, ", worst_norm) + fmt("L^-1 GF L %.1e, ", worst_diag) + fmt("W eig %.1e, ", worst_w)
            + fmt("%.1f ms", ms)};
}

Outcome power_law()
{
    std::mt19937 rng(77);
    std::uniform_real_distribution<double> ud(-2.0, 2.0);
    double worst = 0.0;
    for (int t = 0; t < 50; ++t) {
        const SymMatrix a(ts::random_spd(2 + t % 9, rng));
        const double g = ud(rng), b = ud(rng);
        const Eigen::MatrixXd lhs = matrix_power(a, g).matrix() * matrix_power(a, b).matrix();
        const Eigen::MatrixXd rhs = matrix_power(a, g + b).matrix();
        worst = std::max(worst, (lhs - rhs).norm() / rhs.norm());
    }
    return {worst < 1e-9, fmt("worst relative Frobenius error %.1e", worst)};
}

Outcome dynamics_vs_rk4()
{
    std::mt19937 rng(31);
    std::normal_distribution<double> nd;
    double worst = 0.0, drift = 0.0;
    for (int t = 0; t <= 20; ++t) {
        const int n = t == 0 ? 2 : 1 + t % 8;
        Eigen::MatrixXd g, f;
        InitialConditions ic{Eigen::VectorXd(n), Eigen::VectorXd(n)};
        if (t == 0) {
            g = Eigen::Matrix2d::Identity();
            f = (Eigen::Matrix2d() << 2, -1, -1, 2).finished();
            ic.kappa << 0.1, 0.0;
            ic.beta_vel << 0.0, 0.05;
        } else {
            g = ts::random_spd(n, rng);
            f = ts::random_spd(n, rng);
            for (int i = 0; i < n; ++i) {
                ic.kappa(i) = 0.1 * nd(rng);
                ic.beta_vel(i) = 0.1 * nd(rng);
            }
        }
        const SymMatrix gs(g), fs(f), gi(Eigen::MatrixXd(g.inverse()));
        const NormalModeResult modes = solve(gs, {fs, std::nullopt});
        const Trajectory tr = trajectory_closed_form(modes, gi, ic, {1.0});
        const State rk = rk4_oracle(gi, fs, ic, 1.0, 1e-3);
        worst = std::max(worst, (tr.positions.row(0).transpose() - rk.x).cwiseAbs().maxCoeff());

        std::vector<double> times(1000);
        for (size_t i = 0; i < times.size(); ++i)
            times[i] = 0.01 * static_cast<double>(i);
        const Trajectory long_tr = trajectory_closed_form(modes, gi, ic, times);
        const double e0 = harmonic_energy(gi, fs, ic.kappa, ic.beta_vel);
        for (Eigen::Index i = 0; i < long_tr.positions.rows(); ++i) {
            const double e = harmonic_energy(gi, fs, long_tr.positions.row(i).transpose(),
                long_tr.velocities.row(i).transpose());
            drift = std::max(drift, std::abs(e - e0) / e0);
        }
    }
    return {worst < 1e-6 && drift < 1e-10, fmt("max |x - x_rk4| %.1e, ", worst) + fmt("relative energy drift %.1e", drift)};
}

Outcome rotor_exact()
{
    const double a = 3.0, b = 2.0, c = 1.0;
    const RotorSpec s = classify(a, b, c);
    double worst = 0.0;
    std::vector<double> j1;
    for (const auto& lv : asymmetric_levels(s, 1))
        if (lv.j == 1)
            j1.push_back(lv.energy);
    std::vector<double> e1{b + c, a + c, a + b};
    std::sort(e1.begin(), e1.end());
    for (size_t i = 0; i < 3; ++i)
        worst = std::max(worst, std::abs(j1[i] - e1[i]));

    std::vector<double> ones;
    Eigen::Matrix2d ep = Eigen::Matrix2d::Zero();
    for (const auto& blk : wang_blocks(asymmetric_hamiltonian(s, 2), 2)) {
        if (blk.parity_class == Parity::EPlus)
            ep = blk.hmatrix;
        else
            ones.push_back(blk.hmatrix(0, 0));
    }
    std::sort(ones.begin(), ones.end());
    std::vector<double> e2{4 * a + b + c, a + 4 * b + c, a + b + 4 * c};
    std::sort(e2.begin(), e2.end());
    for (size_t i = 0; i < 3; ++i)
        worst = std::max(worst, std::abs(ones[i] - e2[i]));
    Eigen::Matrix2d ref;
    ref << 3 * (b + c), std::sqrt(3.0) * (b - c), std::sqrt(3.0) * (b - c), 4 * a + b + c;
    worst = std::max(worst, (ep - ref).cwiseAbs().maxCoeff());
    return {worst < 1e-12, fmt("max deviation %.1e", worst)};
}

Outcome symmetric_limit()
{
    const double a = 5.0, b = 1.25;
    const RotorSpec s = classify(a, b, b);
    double worst_asym = 0.0, worst_frob = 0.0;
    const auto levels = asymmetric_levels(s, 10);
    for (int j = 0; j <= 10; ++j) {
        std::vector<double> ref, got;
        for (int k = -j; k <= j; ++k)
            ref.push_back(b * j * (j + 1) + (a - b) * k * k);
        for (const auto& lv : levels)
            if (lv.j == j)
                got.push_back(lv.energy);
        std::sort(ref.begin(), ref.end());
        for (size_t i = 0; i < ref.size(); ++i)
            worst_asym = std::max(worst_asym, std::abs(got[i] - ref[i]) / std::max(ref[i], 1e-300));
        for (int k = -j; k <= j; ++k)
            for (int m = -j; m <= j; ++m) {
                const double e = b * j * (j + 1) + (a - b) * k * k;
                const double f = frobenius_solve(s, k, m, j).energy;
                worst_frob = std::max(worst_frob, std::abs(f - e) / std::max(e, 1.0));
            }
    }
    return {worst_asym < 1e-10 && worst_frob < 1e-10,
        fmt("asymmetric solver rel %.1e, ", worst_asym) + fmt("Frobenius rel %.1e", worst_frob)};
}

Outcome wavefunction_quadrature()
{
    const auto t0 = Clock::now();
    // Gauss-Legendre in cos(theta) and uniform grids in phi, chi are exact for J <= 3 products
    const int ng = 16, nu = 16;
    const auto [x, w] = ts::gauss_legendre(ng);
    std::vector<SymTopState> states;
    for (int j = 0; j <= 3; ++j)
        for (int k = -j; k <= j; ++k)
            for (int m = -j; m <= j; ++m)
                states.push_back({j, k, m});
    const auto ns = static_cast<Eigen::Index>(states.size());
    const double du = 2 * std::numbers::pi / nu;
    Eigen::MatrixXcd samples(ng * nu * nu, ns);
    Eigen::Index row = 0;
    for (int i = 0; i < ng; ++i)
        for (int p = 0; p < nu; ++p)
            for (int c = 0; c < nu; ++c, ++row) {
                const EulerAngles e{p * du, std::acos(x[static_cast<size_t>(i)]), c * du};
                const double weight = std::sqrt(w[static_cast<size_t>(i)] * du * du);
                for (Eigen::Index s = 0; s < ns; ++s)
                    samples(row, s) = weight * wavefunction_value(states[static_cast<size_t>(s)], e);
            }
    const Eigen::MatrixXcd gram = samples.adjoint() * samples;
    const double worst = (gram - Eigen::MatrixXcd::Identity(ns, ns)).cwiseAbs().maxCoeff();
    const double ms = elapsed_ms(t0);
    return {worst < 1e-6 && ms < 30000.0,
        fmt("%.0f states, ", static_cast<double>(ns)) + fmt("max |<a|b> - delta| %.1e, ", worst) + fmt("%.1f ms", ms)};
}

Outcome anomalous_commutation()
{
    double worst = 0.0;
    const std::complex<double> i(0.0, 1.0);
    for (int j = 0; j <= 5; ++j) {
        const MoleculeFrameOperators ops = molecule_frame_operators(j);
        const Eigen::MatrixXcd jz = ops.jz.cast<std::complex<double>>();
        worst = std::max(worst, (ops.jx * ops.jy - ops.jy * ops.jx + i * jz).cwiseAbs().maxCoeff());
    }
    return {worst < 1e-12, fmt("max residual %.1e", worst)};
}

Outcome watson_diagnostics()
{
    const Molecule mol = ts::water();
    const NormalModeResult modes = ts::water_modes();
    const CoriolisData cd = coriolis_data(mol, modes.l);
    bool exact = true;
    for (int a = 0; a < 3; ++a)
        exact = exact && (cd.zeta[a] + cd.zeta[a].transpose()).cwiseAbs().maxCoeff() == 0.0;
    for (const auto& a : cd.a_coeff)
        exact = exact && (a - a.transpose()).cwiseAbs().maxCoeff() == 0.0;
    const SumRuleReport sr = sum_rule_residuals(cd, mol, modes.l);

    const InertiaExpansion ie = make_inertia_expansion(mol, modes.l);
    const Molecule eq = center_of_mass_shift(mol);
    const Eigen::VectorXd inv_sqrt_m = mass_matrix(mol).diagonal.cwiseSqrt().cwiseInverse();
    double worst_ip = 0.0, worst_mu = 0.0;
    for (int s = -5; s <= 5; ++s) {
        const Eigen::Vector3d q = 0.01 * s * Eigen::Vector3d(1.0, -0.7, 0.4);
        const Eigen::VectorXd flat = eq.flat_positions() + inv_sqrt_m.asDiagonal() * (modes.l * q);
        Eigen::Matrix3d ref = Eigen::Matrix3d::Zero();
        for (int i = 0; i < 3; ++i) {
            const Eigen::Vector3d r = flat.segment<3>(3 * i);
            ref += mol.atom(i).mass * (r.squaredNorm() * Eigen::Matrix3d::Identity() - r * r.transpose());
        }
        for (int al = 0; al < 3; ++al)
            for (int be = 0; be < 3; ++be)
                for (int k = 0; k < 3; ++k)
                    for (int m = 0; m < 3; ++m)
                        for (int l = 0; l < 3; ++l)
                            ref(al, be) -= cd.zeta[al](k, l) * cd.zeta[be](m, l) * q(k) * q(m);
        const Eigen::Matrix3d ip = ie.i_prime(q);
        worst_ip = std::max(worst_ip, (ip - ref).cwiseAbs().maxCoeff());
        worst_mu = std::max(worst_mu, (ie.mu(q) * ip - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff());
    }
    const double u_ref = -inertia_tensor(mol).inverse().trace() / 8.0;
    const double u = watson_u(ie, Eigen::Vector3d::Zero(), UnitMode::Natural);
    const double eu = std::abs(u - u_ref) / std::abs(u_ref);
    return {exact && sr.rule1 < 1e-8 && sr.rule2 < 1e-8 && worst_ip < 1e-10 && worst_mu < 1e-10 && eu < 1e-13,
        std::string(exact ? "symmetries exact, " : "symmetries NOT exact, ") + fmt("sum rules %.1e %.1e, ", sr.rule1, sr.rule2)
            + fmt("I' %.1e, ", worst_ip) + fmt("mu I' %.1e, ", worst_mu) + fmt("U rel %.1e", eu)};
}

Outcome frame_checks()
{
    std::mt19937 rng(55);
    std::uniform_real_distribution<double> ang(0.0, 2 * std::numbers::pi), th(1e-3, std::numbers::pi - 1e-3);
    double worst_det = 0.0, worst_pod = 0.0, worst_eck = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const EulerAngles e{ang(rng), th(rng), ang(rng)};
        worst_det = std::max(worst_det, std::abs(build_a_matrix(e, {}).euler_block().determinant() - std::sin(e.theta)));
    }
    for (int i = 0; i < 100; ++i) {
        const EulerAngles e{ang(rng), 0.05 + (std::numbers::pi - 0.1) * i / 99.0, ang(rng)};
        worst_pod = std::max(worst_pod, std::abs(podolsky_condition_residual(e)));
    }
    std::normal_distribution<double> nd;
    const Molecule mol = ts::water();
    for (int t = 0; t < 50; ++t) {
        const Eigen::Matrix3d r = rotation_zyz({ang(rng), th(rng), ang(rng)});
        Eigen::VectorXd g(9);
        for (int i = 0; i < 3; ++i) {
            const Eigen::Vector3d p = mol.atom(i).position;
            g.segment<3>(3 * i) = r * (p + 0.05 * p.norm() * Eigen::Vector3d(nd(rng), nd(rng), nd(rng)));
        }
        worst_eck = std::max(worst_eck, eckart_residual(mol, eckart_rotate(mol, g).geometry).norm());
    }
    return {worst_det < 1e-10 && worst_pod < 1e-3 && worst_eck < 1e-8,
        fmt("det %.1e, ", worst_det) + fmt("Podolsky %.1e, ", worst_pod) + fmt("Eckart %.1e", worst_eck)};
}

Outcome cli_determinism()
{
    namespace fs = std::filesystem;
    const fs::path base = fs::temp_directory_path() / "gfmodes_acceptance";
    fs::remove_all(base);
    const auto read = [](const fs::path& p) {
        std::ifstream f(p, std::ios::binary);
        std::stringstream ss;
        ss << f.rdbuf();
        return ss.str();
    };
    int compared = 0;
    for (const char* name : {"two_mass.inp", "water.inp", "rotor_321.inp"}) {
        std::string reports[2];
        for (int run = 0; run < 2; ++run) {
            const fs::path out = base / (std::string(name) + std::to_string(run));
            const std::string cmd = std::string(GFMODES_CLI) + " analyze " + GFMODES_DATA_DIR + "/" + name
                + " --out " + out.string() + " > /dev/null 2>&1";
            const int status = std::system(cmd.c_str());
            if (!WIFEXITED(status) || WEXITSTATUS(status) != 0)
                return {false, std::string("CLI failed on ") + name};
            reports[run] = read(out / "report.json");
        }
        if (reports[0].empty() || reports[0] != reports[1])
            return {false, std::string("report.json differs for ") + name};
        ++compared;
    }
    return {true, fmt("%.0f fixtures byte-identical", compared)};
}

} // namespace

int main()
{
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"two-mass three-spring regression", two_mass_regression},
        {"GF invariants on random SPD pairs", gf_invariants},
        {"matrix power law", power_law},
        {"closed-form dynamics against RK4", dynamics_vs_rk4},
        {"rigid rotor exact levels", rotor_exact},
        {"symmetric-top limit", symmetric_limit},
        {"wavefunction orthonormality by quadrature", wavefunction_quadrature},
        {"anomalous commutation", anomalous_commutation},
        {"Watson diagnostics", watson_diagnostics},
        {"frames, a-matrix and Eckart rotation", frame_checks},
        {"CLI determinism", cli_determinism},
    };
    int failed = 0;
    for (size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failed += o.pass ? 0 : 1;
        std::printf("[%s] %2zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), o.detail.c_str());
    }
    std::printf("%zu/%zu criteria passed\n", criteria.size() - static_cast<size_t>(failed), criteria.size());
    return failed == 0 ? 0 : 1;
}
