#pragma once

#include "dynamics.hpp"
#include "errors.hpp"
#include "molecule.hpp"
#include "normalmodes.hpp"
#include "rotor.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace gfmodes {

class InputError : public Error {
public:
    InputError(Errc code, const std::string& source, int line, int column, const std::string& msg)
        : Error(code, source + ":" + std::to_string(line) + ":" + std::to_string(column) + ": " + msg),
          line_(line), column_(column)
    {
    }

    int line() const noexcept { return line_; }
    int column() const noexcept { return column_; }

private:
    int line_;
    int column_;
};

struct Tolerances {
    double force_symmetry = 1e-9; // larger asymmetry in F is rejected
};

struct DynamicsSpec {
    InitialConditions ic;
    double t_end = 10.0;
    int samples = 101;
};

struct RotorInput {
    std::optional<RotorSpec> spec; // absent when derived from the geometry
    int jmax = 2;
};

struct ParsedInput {
    std::optional<Molecule> molecule;
    InternalCoordinateSet coordinates;
    std::optional<ForceField> force_field;
    std::optional<RotorInput> rotor;
    std::optional<DynamicsSpec> dynamics;
    std::optional<UnitMode> units;
    Tolerances tolerances;
    std::vector<std::string> warnings;
};

namespace detail {

struct Token {
    std::string text;
    int column;
};

inline std::vector<Token> tokenize(const std::string& line)
{
    std::vector<Token> out;
    size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (std::isspace(static_cast<unsigned char>(line[i])) || line[i] == ','))
            ++i;
        if (i >= line.size() || line[i] == '#')
            break;
        const size_t start = i;
        while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i])) && line[i] != ',' && line[i] != '#')
            ++i;
        out.push_back({line.substr(start, i - start), static_cast<int>(start) + 1});
    }
    return out;
}

class LineParser {
public:
    LineParser(std::string source) : source_(std::move(source)) {}

    [[noreturn]] void fail(int line, int column, const std::string& msg, Errc code = Errc::ParseError) const
    {
        throw InputError(code, source_, line, column, msg);
    }

    double number(const Token& t, int line) const
    {
        double v = 0.0;
        const char* first = t.text.data();
        const char* last = first + t.text.size();
        auto [ptr, ec] = std::from_chars(first, last, v);
        if (ec != std::errc() || ptr != last || !std::isfinite(v))
            fail(line, t.column, "expected a number, got '" + t.text + "'");
        return v;
    }

    int integer(const Token& t, int line) const
    {
        int v = 0;
        const char* first = t.text.data();
        const char* last = first + t.text.size();
        auto [ptr, ec] = std::from_chars(first, last, v);
        if (ec != std::errc() || ptr != last)
            fail(line, t.column, "expected an integer, got '" + t.text + "'");
        return v;
    }

    const std::string& source() const { return source_; }

private:
    std::string source_;
};

struct KeyValue {
    std::string key;
    std::vector<Token> values;
    int line;
    int column;
};

inline int parse_axis(const LineParser& p, const Token& t, int line)
{
    if (t.text == "x" || t.text == "X")
        return 0;
    if (t.text == "y" || t.text == "Y")
        return 1;
    if (t.text == "z" || t.text == "Z")
        return 2;
    p.fail(line, t.column, "expected axis x, y or z, got '" + t.text + "'");
}

} // namespace detail

/// Reads the sectioned job file described in README.md.
inline ParsedInput parse_input_text(const std::string& text, const std::string& source = "<input>")
{
    using detail::Token;
    detail::LineParser p(source);
    ParsedInput in;

    std::string section;
    std::vector<std::string> seen;
    std::map<std::string, std::vector<detail::KeyValue>> keyed;
    std::vector<std::pair<int, std::vector<Token>>> atom_rows, coord_rows, force_rows;
    int atoms_line = 0;

    std::istringstream is(text);
    std::string raw;
    int lineno = 0;
    while (std::getline(is, raw)) {
        ++lineno;
        if (!raw.empty() && raw.back() == '\r')
            raw.pop_back();
        const size_t first = raw.find_first_not_of(" \t");
        if (first == std::string::npos || raw[first] == '#')
            continue;
        if (raw[first] == '[') {
            const size_t close = raw.find(']', first);
            if (close == std::string::npos)
                p.fail(lineno, static_cast<int>(first) + 1, "unterminated section header");
            section = raw.substr(first + 1, close - first - 1);
            static const std::vector<std::string> known
                = {"molecule", "atoms", "internal_coordinates", "force_constants", "rotor", "dynamics", "tolerances"};
            if (std::find(known.begin(), known.end(), section) == known.end())
                p.fail(lineno, static_cast<int>(first) + 2, "unknown section [" + section + "]");
            if (std::find(seen.begin(), seen.end(), section) != seen.end())
                p.fail(lineno, static_cast<int>(first) + 2, "duplicate section [" + section + "]");
            seen.push_back(section);
            if (section == "atoms")
                atoms_line = lineno;
            const auto rest = detail::tokenize(raw.substr(close + 1));
            if (!rest.empty())
                p.fail(lineno, static_cast<int>(close) + 1 + rest[0].column, "unexpected text after section header");
            continue;
        }
        if (section.empty())
            p.fail(lineno, static_cast<int>(first) + 1, "content before the first section header");

        if (section == "atoms" || section == "internal_coordinates" || section == "force_constants") {
            auto toks = detail::tokenize(raw);
            auto& rows = section == "atoms" ? atom_rows : section == "internal_coordinates" ? coord_rows : force_rows;
            rows.emplace_back(lineno, std::move(toks));
            continue;
        }

        const size_t eq = raw.find('=');
        if (eq == std::string::npos)
            p.fail(lineno, static_cast<int>(first) + 1, "expected key = value");
        auto key_toks = detail::tokenize(raw.substr(0, eq));
        if (key_toks.size() != 1)
            p.fail(lineno, static_cast<int>(first) + 1, "expected a single key before '='");
        auto vals = detail::tokenize(raw.substr(eq + 1));
        for (auto& v : vals)
            v.column += static_cast<int>(eq) + 1;
        if (vals.empty())
            p.fail(lineno, static_cast<int>(eq) + 2, "missing value");
        for (const auto& kv : keyed[section])
            if (kv.key == key_toks[0].text)
                p.fail(lineno, key_toks[0].column, "duplicate key '" + kv.key + "'");
        keyed[section].push_back({key_toks[0].text, std::move(vals), lineno, key_toks[0].column});
    }

    auto single = [&](const detail::KeyValue& kv) -> const Token& {
        if (kv.values.size() != 1)
            p.fail(kv.line, kv.values[1].column, "key '" + kv.key + "' takes a single value");
        return kv.values[0];
    };

    int dimensionality = 3;
    for (const auto& kv : keyed["molecule"]) {
        if (kv.key == "dimensionality") {
            dimensionality = p.integer(single(kv), kv.line);
            if (dimensionality < 1 || dimensionality > 3)
                p.fail(kv.line, kv.values[0].column, "dimensionality must be 1, 2 or 3", Errc::ValidationError);
        } else if (kv.key == "units") {
            const auto& v = single(kv);
            if (v.text == "natural")
                in.units = UnitMode::Natural;
            else if (v.text == "cm" || v.text == "spectroscopic")
                in.units = UnitMode::Spectroscopic;
            else
                p.fail(kv.line, v.column, "units must be natural or cm");
        } else {
            p.fail(kv.line, kv.column, "unknown key '" + kv.key + "' in [molecule]");
        }
    }

    for (const auto& kv : keyed["tolerances"]) {
        if (kv.key == "force_symmetry")
            in.tolerances.force_symmetry = p.number(single(kv), kv.line);
        else
            p.fail(kv.line, kv.column, "unknown key '" + kv.key + "' in [tolerances]");
    }

    if (atoms_line > 0) {
        if (atom_rows.empty())
            p.fail(atoms_line, 1, "[atoms] section is empty", Errc::ValidationError);
        std::vector<Atom> atoms;
        for (const auto& [ln, toks] : atom_rows) {
            if (toks.size() < 3 || static_cast<int>(toks.size()) > 2 + dimensionality)
                p.fail(ln, toks.empty() ? 1 : toks[0].column,
                    "atom line needs a label, a mass and 1.." + std::to_string(dimensionality) + " coordinates");
            Atom a;
            a.label = toks[0].text;
            a.mass = p.number(toks[1], ln);
            if (!(a.mass > 0.0))
                p.fail(ln, toks[1].column, "mass must be positive", Errc::ValidationError);
            for (size_t c = 2; c < toks.size(); ++c)
                a.position(static_cast<Eigen::Index>(c - 2)) = p.number(toks[c], ln);
            atoms.push_back(a);
        }
        try {
            in.molecule = Molecule(std::move(atoms), dimensionality);
        } catch (const Error& e) {
            p.fail(atoms_line, 1, e.what(), Errc::ValidationError);
        }
    }

    const Molecule* mol = in.molecule ? &*in.molecule : nullptr;
    for (const auto& [ln, toks] : coord_rows) {
        if (!mol)
            p.fail(ln, 1, "internal coordinates need an [atoms] section", Errc::ValidationError);
        const std::string& kind = toks[0].text;
        auto atom_index = [&, ln = ln](const Token& t) {
            const int i = p.integer(t, ln);
            if (i < 1 || i > mol->size())
                p.fail(ln, t.column, "atom index " + t.text + " out of range 1.." + std::to_string(mol->size()),
                    Errc::ValidationError);
            return i - 1;
        };
        auto expect = [&, ln = ln](size_t n) {
            if (toks.size() != n + 1)
                p.fail(ln, toks[0].column, "'" + kind + "' takes " + std::to_string(n) + " arguments");
        };
        if (kind == "stretch") {
            expect(2);
            in.coordinates.push_back(BondStretch{atom_index(toks[1]), atom_index(toks[2])});
        } else if (kind == "bend") {
            expect(3);
            in.coordinates.push_back(AngleBend{atom_index(toks[1]), atom_index(toks[2]), atom_index(toks[3])});
        } else if (kind == "torsion") {
            expect(4);
            in.coordinates.push_back(
                Torsion{atom_index(toks[1]), atom_index(toks[2]), atom_index(toks[3]), atom_index(toks[4])});
        } else if (kind == "cartesian") {
            expect(2);
            const int atom = atom_index(toks[1]);
            const int axis = detail::parse_axis(p, toks[2], ln);
            if (axis >= mol->dimensionality())
                p.fail(ln, toks[2].column, "axis outside the active dimensions", Errc::ValidationError);
            in.coordinates.push_back(CartesianDisplacement{atom, axis});
        } else if (kind == "combination") {
            expect(static_cast<size_t>(mol->cartesian_dim()));
            Eigen::VectorXd w(mol->cartesian_dim());
            for (Eigen::Index c = 0; c < w.size(); ++c)
                w(c) = p.number(toks[static_cast<size_t>(c) + 1], ln);
            in.coordinates.push_back(LinearCombination{w});
        } else {
            p.fail(ln, toks[0].column, "unknown coordinate kind '" + kind + "'");
        }
    }

    if (!force_rows.empty()) {
        const auto n = static_cast<Eigen::Index>(force_rows.size());
        if (!in.coordinates.empty() && n != static_cast<Eigen::Index>(in.coordinates.size()))
            p.fail(force_rows.front().first, 1,
                "force constant matrix has " + std::to_string(n) + " rows for "
                    + std::to_string(in.coordinates.size()) + " internal coordinates",
                Errc::ValidationError);
        bool full = true;
        for (const auto& row : force_rows)
            full = full && static_cast<Eigen::Index>(row.second.size()) == n;
        Eigen::MatrixXd f = Eigen::MatrixXd::Zero(n, n);
        for (Eigen::Index i = 0; i < n; ++i) {
            const auto& [ln, toks] = force_rows[static_cast<size_t>(i)];
            const auto expected = full ? n : i + 1;
            if (static_cast<Eigen::Index>(toks.size()) != expected)
                p.fail(ln, toks.empty() ? 1 : toks[0].column,
                    "row " + std::to_string(i + 1) + " needs " + std::to_string(expected) + " entries");
            for (Eigen::Index j = 0; j < expected; ++j) {
                f(i, j) = p.number(toks[static_cast<size_t>(j)], ln);
                if (!full)
                    f(j, i) = f(i, j);
            }
        }
        if (full) {
            const double scale = std::max(f.cwiseAbs().maxCoeff(), 1e-300);
            const double asym = (f - f.transpose()).cwiseAbs().maxCoeff();
            if (asym > in.tolerances.force_symmetry * scale)
                p.fail(force_rows.front().first, 1, "force constant matrix is not symmetric", Errc::ValidationError);
            if (asym > 0.0)
                in.warnings.push_back("force constant matrix symmetrized (max asymmetry "
                    + std::to_string(asym) + ")");
        }
        in.force_field = ForceField{SymMatrix(f), std::nullopt};
    }

    if (std::find(seen.begin(), seen.end(), "rotor") != seen.end()) {
        RotorInput r;
        bool from_geometry = false;
        for (const auto& kv : keyed["rotor"]) {
            if (kv.key == "constants") {
                if (kv.values.size() != 3)
                    p.fail(kv.line, kv.values[0].column, "constants takes three values A B C");
                const double a = p.number(kv.values[0], kv.line);
                const double b = p.number(kv.values[1], kv.line);
                const double c = p.number(kv.values[2], kv.line);
                try {
                    r.spec = classify(a, b, c);
                } catch (const Error& e) {
                    p.fail(kv.line, kv.values[0].column, e.what(), Errc::ValidationError);
                }
            } else if (kv.key == "from_geometry") {
                const auto& v = single(kv);
                if (v.text != "true" && v.text != "false")
                    p.fail(kv.line, v.column, "from_geometry must be true or false");
                from_geometry = v.text == "true";
            } else if (kv.key == "jmax") {
                r.jmax = p.integer(single(kv), kv.line);
                if (r.jmax < 0)
                    p.fail(kv.line, kv.values[0].column, "jmax must be non-negative", Errc::ValidationError);
            } else {
                p.fail(kv.line, kv.column, "unknown key '" + kv.key + "' in [rotor]");
            }
        }
        if (!r.spec && !from_geometry)
            throw Error(Errc::ValidationError, source + ": [rotor] needs constants or from_geometry = true");
        if (r.spec && from_geometry)
            throw Error(Errc::ValidationError, source + ": [rotor] has both constants and from_geometry");
        if (from_geometry && !mol)
            throw Error(Errc::ValidationError, source + ": from_geometry needs an [atoms] section");
        in.rotor = r;
    }

    if (std::find(seen.begin(), seen.end(), "dynamics") != seen.end()) {
        DynamicsSpec d;
        const auto n = static_cast<Eigen::Index>(in.coordinates.size());
        auto vec = [&](const detail::KeyValue& kv) {
            if (static_cast<Eigen::Index>(kv.values.size()) != n)
                p.fail(kv.line, kv.values[0].column,
                    "'" + kv.key + "' needs one value per internal coordinate (" + std::to_string(n) + ")",
                    Errc::ValidationError);
            Eigen::VectorXd v(n);
            for (Eigen::Index i = 0; i < n; ++i)
                v(i) = p.number(kv.values[static_cast<size_t>(i)], kv.line);
            return v;
        };
        d.ic.kappa = Eigen::VectorXd::Zero(n);
        d.ic.beta_vel = Eigen::VectorXd::Zero(n);
        for (const auto& kv : keyed["dynamics"]) {
            if (kv.key == "kappa")
                d.ic.kappa = vec(kv);
            else if (kv.key == "velocity")
                d.ic.beta_vel = vec(kv);
            else if (kv.key == "t_end") {
                d.t_end = p.number(single(kv), kv.line);
                if (!(d.t_end >= 0.0))
                    p.fail(kv.line, kv.values[0].column, "t_end must be non-negative", Errc::ValidationError);
            } else if (kv.key == "samples") {
                d.samples = p.integer(single(kv), kv.line);
                if (d.samples < 2)
                    p.fail(kv.line, kv.values[0].column, "samples must be at least 2", Errc::ValidationError);
            } else
                p.fail(kv.line, kv.column, "unknown key '" + kv.key + "' in [dynamics]");
        }
        in.dynamics = d;
    }
    return in;
}

inline ParsedInput parse_input(const std::string& path)
{
    std::ifstream f(path);
    if (!f)
        throw Error(Errc::ValidationError, "cannot open input file " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_input_text(ss.str(), path);
}

} // namespace gfmodes
