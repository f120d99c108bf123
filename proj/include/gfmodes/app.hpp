#pragma once

#include "dynamics.hpp"
#include "errors.hpp"
#include "frames.hpp"
#include "input.hpp"
#include "molecule.hpp"
#include "normalmodes.hpp"
#include "rotor.hpp"
#include "watson.hpp"

#include <Eigen/Dense>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace gfmodes {

enum class Task { Modes, Dynamics, Rotor, Watson };

struct JobSpec {
    std::string input_path;
    std::vector<Task> tasks; // empty: every task the input supports
    std::string output_dir = ".";
    std::optional<UnitMode> units;
    std::optional<int> jmax;
    int frames = 20;
    double amplitude = 0.25; // Angstrom of the largest atomic excursion
};

inline Task parse_task(const std::string& name)
{
    if (name == "modes")
        return Task::Modes;
    if (name == "dynamics")
        return Task::Dynamics;
    if (name == "rotor")
        return Task::Rotor;
    if (name == "watson" || name == "watson-diagnostics")
        return Task::Watson;
    throw Error(Errc::ValidationError, "unknown task '" + name + "'");
}

inline std::vector<Task> parse_task_list(const std::string& csv)
{
    std::vector<Task> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty())
            out.push_back(parse_task(item));
    if (out.empty())
        throw Error(Errc::ValidationError, "no tasks given");
    return out;
}

inline std::string format_real(double v)
{
    if (std::isinf(v) || std::isnan(v))
        return "null";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12e", v);
    return buf;
}

/// Minimal JSON emitter with fixed field order and %.12e reals.
class JsonWriter {
public:
    JsonWriter& begin_object(const std::string& key = {}) { return open(key, '{'); }
    JsonWriter& end_object() { return close('}'); }
    JsonWriter& begin_array(const std::string& key = {}) { return open(key, '['); }
    JsonWriter& end_array() { return close(']'); }

    JsonWriter& real(const std::string& key, double v) { return raw(key, format_real(v)); }
    JsonWriter& real(double v) { return raw({}, format_real(v)); }
    JsonWriter& integer(const std::string& key, long v) { return raw(key, std::to_string(v)); }
    JsonWriter& string(const std::string& key, const std::string& v) { return raw(key, quote(v)); }
    JsonWriter& string(const std::string& v) { return raw({}, quote(v)); }
    JsonWriter& null(const std::string& key) { return raw(key, "null"); }

    JsonWriter& vector(const std::string& key, const Eigen::VectorXd& v)
    {
        begin_array(key);
        for (Eigen::Index i = 0; i < v.size(); ++i)
            real(v(i));
        return end_array();
    }

    /// Row-major nested arrays.
    JsonWriter& matrix(const std::string& key, const Eigen::MatrixXd& m)
    {
        begin_array(key);
        for (Eigen::Index r = 0; r < m.rows(); ++r)
            vector({}, m.row(r).transpose());
        return end_array();
    }

    std::string str() const { return out_.str() + "\n"; }

private:
    JsonWriter& open(const std::string& key, char c)
    {
        prefix(key);
        out_ << c;
        first_.push_back(true);
        return *this;
    }

    JsonWriter& close(char c)
    {
        const bool empty = first_.back();
        first_.pop_back();
        if (!empty)
            out_ << "\n" << std::string(2 * first_.size(), ' ');
        out_ << c;
        return *this;
    }

    JsonWriter& raw(const std::string& key, const std::string& text)
    {
        prefix(key);
        out_ << text;
        return *this;
    }

    void prefix(const std::string& key)
    {
        if (!first_.empty()) {
            if (!first_.back())
                out_ << ",";
            out_ << "\n" << std::string(2 * first_.size(), ' ');
            first_.back() = false;
        }
        if (!key.empty())
            out_ << quote(key) << ": ";
    }

    static std::string quote(const std::string& s)
    {
        std::string q = "\"";
        for (char c : s) {
            if (c == '"' || c == '\\')
                q += '\\';
            q += c;
        }
        return q + "\"";
    }

    std::ostringstream out_;
    std::vector<bool> first_;
};

struct RunOutputs {
    std::string report_json;
    std::string modes_xyz;
    std::string levels_txt;
    std::string trajectory_csv;
};

namespace detail {

inline bool has_task(const std::vector<Task>& tasks, Task t)
{
    return std::find(tasks.begin(), tasks.end(), t) != tasks.end();
}

inline std::string xyz_frames(const Molecule& mol, const NormalModeResult& res, int frames, double amplitude)
{
    std::ostringstream os;
    char buf[160];
    for (Eigen::Index s = 0; s < res.cart_displacements.cols(); ++s) {
        Eigen::VectorXd mode = res.cart_displacements.col(s);
        double largest = 0.0;
        for (int i = 0; i < mol.size(); ++i)
            largest = std::max(largest, mode.segment(i * mol.dimensionality(), mol.dimensionality()).norm());
        if (largest > 0.0)
            mode /= largest;
        const auto geoms = largest > 0.0 ? mode_animation(mol, mode, amplitude, frames)
                                         : std::vector<Molecule>(static_cast<size_t>(frames), mol);
        for (int t = 0; t < frames; ++t) {
            os << mol.size() << "\n";
            std::snprintf(buf, sizeof buf, "mode=%d freq=%.6f frame=%d", static_cast<int>(s) + 1, res.frequencies(s), t);
            os << buf << "\n";
            for (const auto& a : geoms[static_cast<size_t>(t)].atoms()) {
                std::snprintf(buf, sizeof buf, "%-4s %14.8f %14.8f %14.8f", a.label.c_str(), a.position(0),
                    a.position(1), a.position(2));
                os << buf << "\n";
            }
        }
    }
    return os.str();
}

} // namespace detail

/// Runs the requested tasks and renders every output file in memory.
inline RunOutputs compute_outputs(const ParsedInput& in, const JobSpec& job)
{
    std::vector<Task> tasks = job.tasks;
    if (tasks.empty()) {
        if (in.force_field)
            tasks.push_back(Task::Modes);
        if (in.dynamics)
            tasks.push_back(Task::Dynamics);
        if (in.rotor)
            tasks.push_back(Task::Rotor);
        if (in.force_field && in.molecule && in.molecule->dimensionality() == 3)
            tasks.push_back(Task::Watson);
    }
    if (tasks.empty())
        throw Error(Errc::ValidationError, "input supports no task");
    const UnitMode units = job.units.value_or(in.units.value_or(UnitMode::Natural));
    const bool need_modes = detail::has_task(tasks, Task::Modes) || detail::has_task(tasks, Task::Dynamics)
        || detail::has_task(tasks, Task::Watson);
    if (need_modes && (!in.molecule || !in.force_field || in.coordinates.empty()))
        throw Error(Errc::ValidationError, "mode analysis needs [atoms], [internal_coordinates] and [force_constants]");
    if (job.frames < 2 || !(job.amplitude > 0.0))
        throw Error(Errc::ValidationError, "animation needs frames >= 2 and a positive amplitude");

    RunOutputs out;
    JsonWriter js;
    js.begin_object();
    js.string("program", "gfmodes");
    js.string("units", units == UnitMode::Natural ? "natural" : "cm-1");
    js.begin_array("tasks");
    for (Task t : {Task::Modes, Task::Dynamics, Task::Rotor, Task::Watson})
        if (detail::has_task(tasks, t))
            js.string(t == Task::Modes ? "modes" : t == Task::Dynamics ? "dynamics" : t == Task::Rotor ? "rotor" : "watson");
    js.end_array();

    std::optional<NormalModeResult> res;
    std::optional<SymMatrix> g;
    if (need_modes) {
        const Molecule& mol = *in.molecule;
        const BMatrix b = build_b_matrix(mol, in.coordinates);
        const MassMatrix mm = mass_matrix(mol);
        g = build_g_matrix(b, mm);
        res = with_cartesian(solve(*g, *in.force_field, units), b, mm);
        const Eigen::Index n = res->L.cols();
        const Eigen::MatrixXd ginv = g->matrix().inverse();
        const double norm_res = (res->L.transpose() * ginv * res->L - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff();
        const double diag_res = (res->L.transpose() * in.force_field->f.matrix() * res->L
            - Eigen::MatrixXd(res->lambdas.asDiagonal())).cwiseAbs().maxCoeff();
        const double l_res = (res->l.transpose() * res->l - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff();

        js.begin_object("modes");
        js.integer("count", static_cast<long>(n));
        js.vector("lambdas", res->lambdas);
        js.vector("frequencies", res->frequencies);
        js.matrix("L", res->L);
        js.matrix("cartesian_displacements", res->cart_displacements.transpose());
        js.begin_object("residuals");
        js.real("normalization", norm_res);
        js.real("diagonalization", diag_res);
        js.real("l_orthonormality", l_res);
        js.end_object();
        js.end_object();

        if (detail::has_task(tasks, Task::Modes))
            out.modes_xyz = detail::xyz_frames(mol, *res, job.frames, job.amplitude);
    }

    if (detail::has_task(tasks, Task::Dynamics)) {
        if (!in.dynamics)
            throw Error(Errc::ValidationError, "dynamics task needs a [dynamics] section");
        const DynamicsSpec& d = *in.dynamics;
        const SymMatrix metric = matrix_power(*g, -1.0);
        std::vector<double> times(static_cast<size_t>(d.samples));
        for (int i = 0; i < d.samples; ++i)
            times[static_cast<size_t>(i)] = d.t_end * i / (d.samples - 1);
        const Trajectory tr = trajectory_closed_form(*res, metric, d.ic, times);
        double e0 = 0.0, drift = 0.0;
        for (Eigen::Index i = 0; i < tr.positions.rows(); ++i) {
            const double e = harmonic_energy(metric, in.force_field->f, tr.positions.row(i).transpose(),
                tr.velocities.row(i).transpose());
            if (i == 0)
                e0 = e;
            drift = std::max(drift, std::abs(e - e0));
        }
        js.begin_object("dynamics");
        js.integer("samples", d.samples);
        js.real("t_end", d.t_end);
        js.real("energy", e0);
        js.real("energy_drift", drift);
        const Eigen::VectorXd amp = res->L.transpose() * (metric.matrix() * d.ic.kappa);
        js.vector("mode_amplitudes", amp);
        js.end_object();

        std::ostringstream csv;
        csv << "t";
        for (Eigen::Index c = 0; c < tr.positions.cols(); ++c)
            csv << ",x" << c + 1;
        csv << "\n";
        for (Eigen::Index r = 0; r < tr.positions.rows(); ++r) {
            csv << format_real(tr.times[static_cast<size_t>(r)]);
            for (Eigen::Index c = 0; c < tr.positions.cols(); ++c)
                csv << "," << format_real(tr.positions(r, c));
            csv << "\n";
        }
        out.trajectory_csv = csv.str();
    }

    if (detail::has_task(tasks, Task::Rotor)) {
        if (!in.rotor)
            throw Error(Errc::ValidationError, "rotor task needs a [rotor] section");
        RotorSpec spec;
        if (in.rotor->spec) {
            spec = *in.rotor->spec;
        } else {
            const InertiaData inr = inertia(*in.molecule);
            spec = classify(inr.constants(0), inr.constants(1), inr.constants(2));
        }
        const int jmax = job.jmax.value_or(in.rotor->jmax);
        const auto levels = asymmetric_levels(spec, jmax);
        js.begin_object("rotor");
        js.string("class", rotor_class_name(spec.classification));
        js.real("A", spec.a_const);
        js.real("B", spec.b_const);
        js.real("C", spec.c_const);
        js.integer("jmax", jmax);
        js.begin_array("levels");
        std::ostringstream lt;
        lt << "# J parity index energy_cm-1 degeneracy\n";
        char buf[128];
        for (const auto& lv : levels) {
            js.begin_object();
            js.integer("J", lv.j);
            js.string("parity", parity_name(lv.parity_class));
            js.integer("index", lv.index);
            js.real("energy", lv.energy);
            js.integer("degeneracy", lv.degeneracy);
            js.end_object();
            std::snprintf(buf, sizeof buf, "%3d %-3s %3d %.12e %4d\n", lv.j, parity_name(lv.parity_class), lv.index,
                lv.energy, lv.degeneracy);
            lt << buf;
        }
        js.end_array();
        js.end_object();
        out.levels_txt = lt.str();
    }

    if (detail::has_task(tasks, Task::Watson)) {
        const Molecule& mol = *in.molecule;
        if (mol.dimensionality() != 3)
            throw Error(Errc::ValidationError, "Watson diagnostics need a 3D molecule");
        const CoriolisData cd = coriolis_data(mol, res->l);
        const SumRuleReport sr = sum_rule_residuals(cd, mol, res->l);
        const EckartReport er = eckart_conditions_check(mol, res->l);
        const InertiaExpansion ie{inertia_tensor(mol), cd.a_coeff};
        js.begin_object("watson");
        js.begin_array("zeta");
        for (int a = 0; a < 3; ++a)
            js.matrix({}, cd.zeta[a]);
        js.end_array();
        js.begin_array("a_coefficients");
        for (const auto& a : cd.a_coeff)
            js.matrix({}, a);
        js.end_array();
        js.begin_object("sum_rules");
        js.real("rule1", sr.rule1);
        js.real("rule2", sr.rule2);
        js.real("rule3_literal", sr.rule3);
        js.end_object();
        js.begin_object("eckart");
        js.real("translational", er.max_translational);
        js.real("rotational", er.max_rotational);
        js.end_object();
        try {
            js.real("watson_u", watson_u(ie, Eigen::VectorXd::Zero(res->L.cols()), units));
        } catch (const Error& e) {
            if (e.code() != Errc::SingularInertia)
                throw;
            js.null("watson_u");
        }
        js.end_object();
    }

    js.begin_array("warnings");
    for (const auto& w : in.warnings)
        js.string(w);
    js.end_array();
    js.end_object();
    out.report_json = js.str();
    return out;
}

/// Writes the job outputs; returns 0, 2 (bad input) or 3 (numerical failure).
inline int run(const JobSpec& job, std::ostream& err = std::cerr)
{
    namespace fs = std::filesystem;
    std::vector<fs::path> written;
    try {
        const ParsedInput in = parse_input(job.input_path);
        for (const auto& w : in.warnings)
            err << "warning: " << w << "\n";
        const RunOutputs out = compute_outputs(in, job);
        const fs::path dir(job.output_dir);
        fs::create_directories(dir);
        auto emit = [&](const std::string& name, const std::string& text) {
            const fs::path p = dir / name;
            written.push_back(p);
            std::ofstream f(p, std::ios::binary);
            f << text;
            if (!f)
                throw Error(Errc::ValidationError, "cannot write " + p.string());
        };
        emit("report.json", out.report_json);
        if (!out.modes_xyz.empty())
            emit("modes.xyz", out.modes_xyz);
        if (!out.levels_txt.empty())
            emit("levels.txt", out.levels_txt);
        if (!out.trajectory_csv.empty())
            emit("trajectory.csv", out.trajectory_csv);
        return 0;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        for (const auto& p : written) {
            std::error_code ec;
            fs::remove(p, ec);
        }
        return is_validation_error(e.code()) ? 2 : 3;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        for (const auto& p : written) {
            std::error_code ec;
            fs::remove(p, ec);
        }
        return 3;
    }
}

} // namespace gfmodes
