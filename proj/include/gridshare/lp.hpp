#pragma once

#include <iosfwd>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace gridshare {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

enum class RowSense { LessEqual, Equal, GreaterEqual };

/// Minimize c'x subject to sparse rows `a'x (<=|=|>=) b` and bounds l <= x <= u.
struct LinearProgram {
    struct Row {
        std::vector<int> index;
        std::vector<double> value;
        RowSense sense = RowSense::LessEqual;
        double rhs = 0.0;
        std::string name;
    };

    std::vector<double> cost;
    std::vector<double> lower;
    std::vector<double> upper;
    std::vector<std::string> names;
    std::vector<Row> rows;

    int add_variable(double objective, double lo = 0.0, double hi = kInfinity,
                     std::string name = {});
    int add_row(const std::vector<std::pair<int, double>>& terms, RowSense sense, double rhs,
                std::string name = {});

    int variable_count() const { return static_cast<int>(cost.size()); }
    int row_count() const { return static_cast<int>(rows.size()); }

    /// Throws std::invalid_argument on inconsistent sizes or non-finite data.
    void validate() const;
};

enum class SolveStatus { Optimal, Infeasible, Unbounded };

const char* to_string(SolveStatus status);

struct Solution {
    SolveStatus status = SolveStatus::Infeasible;
    std::vector<double> values;
    double objective = 0.0;
    long iterations = 0;
};

struct SolverOptions {
    double feasibility_tol = 1e-9;
    double optimality_tol = 1e-9;
    double pivot_tol = 1e-7;
    int refactor_interval = 100;
    double perturbation = 1e-7;  // relative bound perturbation in phase 2; 0 turns it off
    long max_iterations = 0;  // 0 selects a size-based default
};

/// Raised when the simplex cannot reach its tolerances (singular basis,
/// iteration limit, or a residual check that fails after refactoring).
class NumericalFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bounded-variable primal revised simplex with a sparse LU of the basis and
/// product-form updates. Deterministic: Dantzig pricing with index tie-breaks,
/// falling back to Bland's rule on long degenerate stretches.
Solution solve_lp(const LinearProgram& program, const SolverOptions& options = {});

/// Same, starting from a caller-supplied basis: one structural column per row,
/// or -1 to keep the row's slack. Nonbasic structurals start on their lower
/// bound. A singular or infeasible start is dropped in favour of the usual
/// slack/artificial start.
Solution solve_lp(const LinearProgram& program, const SolverOptions& options,
                  const std::vector<int>& start_basis);

/// Largest row or bound violation of `x`, scaled as in the optimality
/// certificate: violation / (1 + max |rhs|).
double relative_primal_residual(const LinearProgram& program, const std::vector<double>& x);

/// Plain-text dump, one constraint per line, for cross-checking elsewhere.
void write_lp_text(std::ostream& out, const LinearProgram& program);

}  // namespace gridshare
