#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace driftrec {

/// Vertex-centred uniform grid on the closed unit square. Node (i, j) sits at
/// (i*hx, j*hy); boundary nodes are part of the grid.
class Grid2D {
public:
    Grid2D(std::size_t nx, std::size_t ny);

    std::size_t nx() const { return nx_; }
    std::size_t ny() const { return ny_; }
    double hx() const { return hx_; }
    double hy() const { return hy_; }
    std::size_t size() const { return nx_ * ny_; }

    // x index runs fastest
    std::size_t index(std::size_t i, std::size_t j) const { return j * nx_ + i; }
    double x(std::size_t i) const { return static_cast<double>(i) * hx_; }
    double y(std::size_t j) const { return static_cast<double>(j) * hy_; }

    bool operator==(const Grid2D& other) const { return nx_ == other.nx_ && ny_ == other.ny_; }

private:
    std::size_t nx_;
    std::size_t ny_;
    double hx_;
    double hy_;
};

class TimeGrid {
public:
    TimeGrid(double final_time, std::size_t steps);

    double final_time() const { return final_time_; }
    std::size_t steps() const { return steps_; }
    double tau() const { return tau_; }
    // t^n; t^steps is exactly final_time
    double time(std::size_t n) const;

private:
    double final_time_;
    std::size_t steps_;
    double tau_;
};

enum class BoundaryTag {
    Interior,
    DirichletBottom,  // y = 0, corners included
    DirichletTop,     // y = 1, corners included
    NeumannRight,     // x = 1
    NeumannLeft,      // x = 0
};

BoundaryTag boundary_tag(const Grid2D& grid, std::size_t i, std::size_t j);
bool is_dirichlet(BoundaryTag tag);

/// Node values of a scalar function on a Grid2D, flat and x-fastest.
class ScalarField {
public:
    explicit ScalarField(Grid2D grid, double value = 0.0);
    ScalarField(Grid2D grid, std::vector<double> values);

    static ScalarField from_function(const Grid2D& grid,
                                     const std::function<double(double, double)>& fn);

    const Grid2D& grid() const { return grid_; }
    std::size_t size() const { return values_.size(); }

    double& operator()(std::size_t i, std::size_t j) { return values_[grid_.index(i, j)]; }
    double operator()(std::size_t i, std::size_t j) const { return values_[grid_.index(i, j)]; }
    double& operator[](std::size_t k) { return values_[k]; }
    double operator[](std::size_t k) const { return values_[k]; }

    std::span<double> values() { return values_; }
    std::span<const double> values() const { return values_; }

    bool all_finite() const;
    double min() const;
    double max() const;

    ScalarField& operator+=(const ScalarField& other);
    ScalarField& operator-=(const ScalarField& other);
    ScalarField& operator*=(double s);

    friend ScalarField operator+(ScalarField a, const ScalarField& b) { return a += b; }
    friend ScalarField operator-(ScalarField a, const ScalarField& b) { return a -= b; }
    friend ScalarField operator*(double s, ScalarField a) { return a *= s; }
    friend ScalarField operator*(ScalarField a, double s) { return a *= s; }

    bool operator==(const ScalarField& other) const = default;

private:
    void check_same_grid(const ScalarField& other) const;

    Grid2D grid_;
    std::vector<double> values_;
};

// Discrete operators. Interior nodes use centred stencils; a missing neighbour
// switches that direction to the three-node one-sided stencil.
ScalarField apply_laplacian(const ScalarField& field);
ScalarField apply_dx(const ScalarField& field);

// Laplacian with mirrored ghost nodes on every side (homogeneous Neumann
// closure). Used by the smoothing operator.
ScalarField apply_neumann_laplacian(const ScalarField& field);

double norm_l2(const ScalarField& field);
double norm_linf(const ScalarField& field);

/// Bilinear interpolation of `field` at the nodes of `target`, any resolution.
ScalarField interpolate(const ScalarField& field, const Grid2D& target);
/// Bilinear value at an arbitrary point of the unit square.
double sample_bilinear(const ScalarField& field, double x, double y);

/// Grid transfer from a fine grid to a coarser (or equal) one.
ScalarField restrict_to(const ScalarField& fine, const Grid2D& coarse);

// Serialisation. CSV layout:
//   nx,ny
//   <nx>,<ny>
//   i,j,x,y,value
//   ... nx*ny rows, x index fastest
void write_csv(std::ostream& out, const ScalarField& field);
void write_csv(const std::string& path, const ScalarField& field);
ScalarField read_csv(std::istream& in);
ScalarField read_csv(const std::string& path);

// Whitespace-separated matrix, ny rows of nx columns. The first row is the
// top edge (y = 1), as in an image.
ScalarField read_matrix(std::istream& in);
ScalarField read_matrix(const std::string& path);
void write_matrix(std::ostream& out, const ScalarField& field);

// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

}  // namespace driftrec
