#include "driftrec/grid.hpp"

#include "driftrec/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <istream>
#include <ostream>
#include <sstream>

namespace driftrec {

Grid2D::Grid2D(std::size_t nx, std::size_t ny)
    : nx_(nx), ny_(ny) {
    if (nx < 3 || ny < 3) {
        throw DimensionError("grid needs at least 3 nodes per direction, got " +
                             std::to_string(nx) + "x" + std::to_string(ny));
    }
    hx_ = 1.0 / static_cast<double>(nx - 1);
    hy_ = 1.0 / static_cast<double>(ny - 1);
}

TimeGrid::TimeGrid(double final_time, std::size_t steps)
    : final_time_(final_time), steps_(steps) {
    if (!(final_time > 0.0) || !std::isfinite(final_time)) {
        throw ConfigError("final time must be positive");
    }
    if (steps < 1) {
        throw ConfigError("need at least one time step");
    }
    tau_ = final_time / static_cast<double>(steps);
}

double TimeGrid::time(std::size_t n) const {
    if (n >= steps_) {
        return final_time_;
    }
    return static_cast<double>(n) * tau_;
}

BoundaryTag boundary_tag(const Grid2D& grid, std::size_t i, std::size_t j) {
    if (j == 0) {
        return BoundaryTag::DirichletBottom;
    }
    if (j == grid.ny() - 1) {
        return BoundaryTag::DirichletTop;
    }
    if (i == 0) {
        return BoundaryTag::NeumannLeft;
    }
    if (i == grid.nx() - 1) {
        return BoundaryTag::NeumannRight;
    }
    return BoundaryTag::Interior;
}

bool is_dirichlet(BoundaryTag tag) {
    return tag == BoundaryTag::DirichletBottom || tag == BoundaryTag::DirichletTop;
}

ScalarField::ScalarField(Grid2D grid, double value)
    : grid_(grid), values_(grid.size(), value) {}

ScalarField::ScalarField(Grid2D grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
    if (values_.size() != grid_.size()) {
        throw DimensionError("field has " + std::to_string(values_.size()) +
                             " values for a grid of " + std::to_string(grid_.size()) + " nodes");
    }
}

ScalarField ScalarField::from_function(const Grid2D& grid,
                                       const std::function<double(double, double)>& fn) {
    ScalarField out(grid);
    for (std::size_t j = 0; j < grid.ny(); ++j) {
        for (std::size_t i = 0; i < grid.nx(); ++i) {
            out(i, j) = fn(grid.x(i), grid.y(j));
        }
    }
    return out;
}

bool ScalarField::all_finite() const {
    return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

double ScalarField::min() const { return *std::min_element(values_.begin(), values_.end()); }
double ScalarField::max() const { return *std::max_element(values_.begin(), values_.end()); }

void ScalarField::check_same_grid(const ScalarField& other) const {
    if (!(grid_ == other.grid_)) {
        throw DimensionError("fields live on different grids");
    }
}

ScalarField& ScalarField::operator+=(const ScalarField& other) {
    check_same_grid(other);
    for (std::size_t k = 0; k < values_.size(); ++k) {
        values_[k] += other.values_[k];
    }
    return *this;
}

ScalarField& ScalarField::operator-=(const ScalarField& other) {
    check_same_grid(other);
    for (std::size_t k = 0; k < values_.size(); ++k) {
        values_[k] -= other.values_[k];
    }
    return *this;
}

ScalarField& ScalarField::operator*=(double s) {
    for (double& v : values_) {
        v *= s;
    }
    return *this;
}

namespace {

// Second difference along one line of nodes, with one-sided closure at the ends.
double second_difference(const ScalarField& f, std::size_t i, std::size_t j, bool along_x) {
    const Grid2D& g = f.grid();
    const std::size_t n = along_x ? g.nx() : g.ny();
    const std::size_t k = along_x ? i : j;
    const double h = along_x ? g.hx() : g.hy();
    auto at = [&](std::size_t m) { return along_x ? f(m, j) : f(i, m); };

    if (k == 0) {
        return (at(0) - 2.0 * at(1) + at(2)) / (h * h);
    }
    if (k == n - 1) {
        return (at(n - 1) - 2.0 * at(n - 2) + at(n - 3)) / (h * h);
    }
    return (at(k - 1) - 2.0 * at(k) + at(k + 1)) / (h * h);
}

}  // namespace

ScalarField apply_laplacian(const ScalarField& field) {
    const Grid2D& g = field.grid();
    ScalarField out(g);
    for (std::size_t j = 0; j < g.ny(); ++j) {
        for (std::size_t i = 0; i < g.nx(); ++i) {
            out(i, j) = second_difference(field, i, j, true) + second_difference(field, i, j, false);
        }
    }
    return out;
}

ScalarField apply_dx(const ScalarField& field) {
    const Grid2D& g = field.grid();
    const std::size_t n = g.nx();
    const double h = g.hx();
    ScalarField out(g);
    for (std::size_t j = 0; j < g.ny(); ++j) {
        out(0, j) = (-3.0 * field(0, j) + 4.0 * field(1, j) - field(2, j)) / (2.0 * h);
        for (std::size_t i = 1; i + 1 < n; ++i) {
            out(i, j) = (field(i + 1, j) - field(i - 1, j)) / (2.0 * h);
        }
        out(n - 1, j) = (3.0 * field(n - 1, j) - 4.0 * field(n - 2, j) + field(n - 3, j)) / (2.0 * h);
    }
    return out;
}

ScalarField apply_neumann_laplacian(const ScalarField& field) {
    const Grid2D& g = field.grid();
    const std::size_t nx = g.nx();
    const std::size_t ny = g.ny();
    const double ihx2 = 1.0 / (g.hx() * g.hx());
    const double ihy2 = 1.0 / (g.hy() * g.hy());
    ScalarField out(g);
    for (std::size_t j = 0; j < ny; ++j) {
        const std::size_t jm = j == 0 ? 1 : j - 1;
        const std::size_t jp = j == ny - 1 ? ny - 2 : j + 1;
        for (std::size_t i = 0; i < nx; ++i) {
            const std::size_t im = i == 0 ? 1 : i - 1;
            const std::size_t ip = i == nx - 1 ? nx - 2 : i + 1;
            const double c = field(i, j);
            out(i, j) = (field(im, j) - 2.0 * c + field(ip, j)) * ihx2 +
                        (field(i, jm) - 2.0 * c + field(i, jp)) * ihy2;
        }
    }
    return out;
}

double norm_l2(const ScalarField& field) {
    double sum = 0.0;
    for (double v : field.values()) {
        sum += v * v;
    }
    return std::sqrt(field.grid().hx() * field.grid().hy() * sum);
}

double norm_linf(const ScalarField& field) {
    double m = 0.0;
    for (double v : field.values()) {
        m = std::max(m, std::abs(v));
    }
    return m;
}

double sample_bilinear(const ScalarField& field, double x, double y) {
    const Grid2D& g = field.grid();
    auto locate = [](double s, double h, std::size_t n, std::size_t& cell, double& frac) {
        double pos = std::clamp(s, 0.0, 1.0) / h;
        auto c = static_cast<std::size_t>(std::floor(pos));
        if (c >= n - 1) {
            c = n - 2;
        }
        cell = c;
        frac = std::clamp(pos - static_cast<double>(c), 0.0, 1.0);
    };
    std::size_t ci = 0;
    std::size_t cj = 0;
    double fx = 0.0;
    double fy = 0.0;
    locate(x, g.hx(), g.nx(), ci, fx);
    locate(y, g.hy(), g.ny(), cj, fy);
    const double v00 = field(ci, cj);
    const double v10 = field(ci + 1, cj);
    const double v01 = field(ci, cj + 1);
    const double v11 = field(ci + 1, cj + 1);
    // std::lerp keeps constants exact and stays within the endpoint range
    return std::lerp(std::lerp(v00, v10, fx), std::lerp(v01, v11, fx), fy);
}

ScalarField interpolate(const ScalarField& field, const Grid2D& target) {
    if (field.grid() == target) {
        return field;
    }
    ScalarField out(target);
    for (std::size_t j = 0; j < target.ny(); ++j) {
        for (std::size_t i = 0; i < target.nx(); ++i) {
            out(i, j) = sample_bilinear(field, target.x(i), target.y(j));
        }
    }
    return out;
}

ScalarField restrict_to(const ScalarField& fine, const Grid2D& coarse) {
    if (coarse.nx() > fine.grid().nx() || coarse.ny() > fine.grid().ny()) {
        throw DimensionError("restriction target " + std::to_string(coarse.nx()) + "x" +
                             std::to_string(coarse.ny()) + " is finer than source " +
                             std::to_string(fine.grid().nx()) + "x" +
                             std::to_string(fine.grid().ny()));
    }
    return interpolate(fine, coarse);
}

std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

void write_csv(std::ostream& out, const ScalarField& field) {
    const Grid2D& g = field.grid();
    out << "nx,ny\n" << g.nx() << ',' << g.ny() << "\ni,j,x,y,value\n";
    for (std::size_t j = 0; j < g.ny(); ++j) {
        for (std::size_t i = 0; i < g.nx(); ++i) {
            out << i << ',' << j << ',' << format_double(g.x(i)) << ',' << format_double(g.y(j))
                << ',' << format_double(field(i, j)) << '\n';
        }
    }
}

void write_csv(const std::string& path, const ScalarField& field) {
    std::ofstream out(path);
    if (!out) {
        throw Error("cannot open " + path + " for writing");
    }
    write_csv(out, field);
}

namespace {

std::vector<std::string> split_commas(const std::string& line) {
    std::vector<std::string> parts;
    std::stringstream ss(line);
    std::string item;
    while (std::getline(ss, item, ',')) {
        parts.push_back(item);
    }
    return parts;
}

double parse_double(const std::string& s, std::size_t line_no) {
    double v = 0.0;
    const char* begin = s.data();
    const char* end = s.data() + s.size();
    while (begin != end && (*begin == ' ' || *begin == '+')) {
        ++begin;
    }
    auto res = std::from_chars(begin, end, v);
    if (res.ec != std::errc{}) {
        throw ConfigError("line " + std::to_string(line_no) + ": bad number '" + s + "'");
    }
    return v;
}

}  // namespace

ScalarField read_csv(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    auto next = [&]() -> bool {
        while (std::getline(in, line)) {
            ++line_no;
            if (!line.empty() && line.back() == '\r') {
                line.pop_back();
            }
            if (!line.empty()) {
                return true;
            }
        }
        return false;
    };
    if (!next() || line != "nx,ny") {
        throw ConfigError("field CSV must start with an 'nx,ny' header");
    }
    if (!next()) {
        throw ConfigError("field CSV is missing its dimensions row");
    }
    auto dims = split_commas(line);
    if (dims.size() != 2) {
        throw ConfigError("line " + std::to_string(line_no) + ": expected nx,ny");
    }
    Grid2D grid(static_cast<std::size_t>(parse_double(dims[0], line_no)),
                static_cast<std::size_t>(parse_double(dims[1], line_no)));
    if (!next() || line != "i,j,x,y,value") {
        throw ConfigError("field CSV is missing the 'i,j,x,y,value' header");
    }
    ScalarField field(grid, std::numeric_limits<double>::quiet_NaN());
    std::size_t count = 0;
    while (next()) {
        auto parts = split_commas(line);
        if (parts.size() != 5) {
            throw ConfigError("line " + std::to_string(line_no) + ": expected 5 columns");
        }
        const double fi = parse_double(parts[0], line_no);
        const double fj = parse_double(parts[1], line_no);
        if (fi < 0 || fj < 0 || fi >= static_cast<double>(grid.nx()) ||
            fj >= static_cast<double>(grid.ny())) {
            throw ConfigError("line " + std::to_string(line_no) + ": node index out of range");
        }
        field(static_cast<std::size_t>(fi), static_cast<std::size_t>(fj)) =
            parse_double(parts[4], line_no);
        ++count;
    }
    if (count != grid.size() || !field.all_finite()) {
        throw ConfigError("field CSV does not cover every node exactly once with a finite value");
    }
    return field;
}

ScalarField read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open " + path);
    }
    return read_csv(in);
}

ScalarField read_matrix(std::istream& in) {
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        std::istringstream ss(line);
        std::vector<double> row;
        double v = 0.0;
        while (ss >> v) {
            row.push_back(v);
        }
        if (!ss.eof()) {
            throw ConfigError("matrix row " + std::to_string(rows.size() + 1) +
                              " has a non-numeric entry");
        }
        if (!row.empty()) {
            rows.push_back(std::move(row));
        }
    }
    if (rows.empty()) {
        throw ConfigError("matrix file is empty");
    }
    const std::size_t nx = rows.front().size();
    for (const auto& r : rows) {
        if (r.size() != nx) {
            throw ConfigError("matrix rows have unequal lengths");
        }
    }
    const std::size_t ny = rows.size();
    ScalarField field(Grid2D(nx, ny));
    for (std::size_t r = 0; r < ny; ++r) {
        for (std::size_t i = 0; i < nx; ++i) {
            field(i, ny - 1 - r) = rows[r][i];
        }
    }
    return field;
}

ScalarField read_matrix(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open " + path);
    }
    return read_matrix(in);
}

void write_matrix(std::ostream& out, const ScalarField& field) {
    const Grid2D& g = field.grid();
    for (std::size_t r = 0; r < g.ny(); ++r) {
        const std::size_t j = g.ny() - 1 - r;
        for (std::size_t i = 0; i < g.nx(); ++i) {
            out << (i ? " " : "") << format_double(field(i, j));
        }
        out << '\n';
    }
}

}  // namespace driftrec
