#include "gridshare/lp.hpp"

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <random>
#include <ostream>

namespace gridshare {

int LinearProgram::add_variable(double objective, double lo, double hi, std::string name) {
    cost.push_back(objective);
    lower.push_back(lo);
    upper.push_back(hi);
    names.push_back(std::move(name));
    return static_cast<int>(cost.size()) - 1;
}

int LinearProgram::add_row(const std::vector<std::pair<int, double>>& terms, RowSense sense,
                           double rhs, std::string name) {
    Row row;
    row.index.reserve(terms.size());
    row.value.reserve(terms.size());
    for (const auto& [j, a] : terms) {
        if (a == 0.0) continue;
        row.index.push_back(j);
        row.value.push_back(a);
    }
    row.sense = sense;
    row.rhs = rhs;
    row.name = std::move(name);
    rows.push_back(std::move(row));
    return static_cast<int>(rows.size()) - 1;
}

void LinearProgram::validate() const {
    const auto n = cost.size();
    if (lower.size() != n || upper.size() != n || (!names.empty() && names.size() != n)) {
        throw std::invalid_argument("linear program: bound/name vectors do not match the cost vector");
    }
    for (std::size_t j = 0; j < n; ++j) {
        if (!std::isfinite(cost[j])) throw std::invalid_argument("linear program: non-finite cost");
        if (std::isnan(lower[j]) || std::isnan(upper[j]) || lower[j] == kInfinity ||
            upper[j] == -kInfinity || lower[j] > upper[j]) {
            throw std::invalid_argument("linear program: invalid bounds on variable " +
                                        std::to_string(j));
        }
    }
    for (const auto& row : rows) {
        if (row.index.size() != row.value.size() || !std::isfinite(row.rhs)) {
            throw std::invalid_argument("linear program: malformed row");
        }
        for (std::size_t k = 0; k < row.index.size(); ++k) {
            if (row.index[k] < 0 || static_cast<std::size_t>(row.index[k]) >= n ||
                !std::isfinite(row.value[k])) {
                throw std::invalid_argument("linear program: bad coefficient in row");
            }
        }
    }
}

const char* to_string(SolveStatus status) {
    switch (status) {
        case SolveStatus::Optimal: return "optimal";
        case SolveStatus::Infeasible: return "infeasible";
        case SolveStatus::Unbounded: return "unbounded";
    }
    return "unknown";
}

double relative_primal_residual(const LinearProgram& program, const std::vector<double>& x) {
    double worst = 0.0;
    double rhs_norm = 0.0;
    for (const auto& row : program.rows) {
        rhs_norm = std::max(rhs_norm, std::abs(row.rhs));
        double ax = 0.0;
        for (std::size_t k = 0; k < row.index.size(); ++k) ax += row.value[k] * x[row.index[k]];
        const double gap = ax - row.rhs;
        switch (row.sense) {
            case RowSense::LessEqual: worst = std::max(worst, gap); break;
            case RowSense::GreaterEqual: worst = std::max(worst, -gap); break;
            case RowSense::Equal: worst = std::max(worst, std::abs(gap)); break;
        }
    }
    for (std::size_t j = 0; j < x.size(); ++j) {
        worst = std::max(worst, program.lower[j] - x[j]);
        worst = std::max(worst, x[j] - program.upper[j]);
    }
    return worst / (1.0 + rhs_norm);
}

namespace {

using Vector = Eigen::VectorXd;

struct Columns {
    std::vector<int> start{0};
    std::vector<int> row;
    std::vector<double> value;

    int count() const { return static_cast<int>(start.size()) - 1; }
    void push(const std::vector<std::pair<int, double>>& entries) {
        for (const auto& [r, v] : entries) {
            row.push_back(r);
            value.push_back(v);
        }
        start.push_back(static_cast<int>(row.size()));
    }
    void truncate(int columns) {
        start.resize(static_cast<std::size_t>(columns) + 1);
        row.resize(static_cast<std::size_t>(start.back()));
        value.resize(static_cast<std::size_t>(start.back()));
    }
};

// LU of a reference basis followed by a file of eta (column replacement) updates.
class BasisFactor {
public:
    explicit BasisFactor(int m) : m_(m) {}

    bool factor(const std::vector<int>& basis, const Columns& cols) {
        std::vector<Eigen::Triplet<double>> triplets;
        for (int r = 0; r < m_; ++r) {
            const int j = basis[static_cast<std::size_t>(r)];
            for (int k = cols.start[j]; k < cols.start[j + 1]; ++k) {
                triplets.emplace_back(cols.row[k], r, cols.value[k]);
            }
        }
        Eigen::SparseMatrix<double> B(m_, m_);
        B.setFromTriplets(triplets.begin(), triplets.end());
        B.makeCompressed();
        lu_.compute(B);
        etas_.clear();
        return lu_.info() == Eigen::Success;
    }

    void ftran(Vector& w) const {
        if (m_ == 0) return;
        w = lu_.solve(w).eval();
        for (const auto& e : etas_) {
            const double wr = w[e.pos] / e.pivot;
            w[e.pos] = wr;
            if (wr == 0.0) continue;
            for (std::size_t k = 0; k < e.index.size(); ++k) w[e.index[k]] -= e.value[k] * wr;
        }
    }

    void btran(Vector& z) const {
        if (m_ == 0) return;
        for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
            double acc = z[it->pos];
            for (std::size_t k = 0; k < it->index.size(); ++k) acc -= it->value[k] * z[it->index[k]];
            z[it->pos] = acc / it->pivot;
        }
        z = lu_.transpose().solve(z).eval();
    }

    void push_eta(int pos, const Vector& alpha) {
        Eta e;
        e.pos = pos;
        e.pivot = alpha[pos];
        for (int i = 0; i < m_; ++i) {
            if (i != pos && std::abs(alpha[i]) > 1e-14) {
                e.index.push_back(i);
                e.value.push_back(alpha[i]);
            }
        }
        etas_.push_back(std::move(e));
    }

    int updates() const { return static_cast<int>(etas_.size()); }

private:
    struct Eta {
        int pos = 0;
        double pivot = 1.0;
        std::vector<int> index;
        std::vector<double> value;
    };

    int m_;
    mutable Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu_;
    std::vector<Eta> etas_;
};

enum class State : std::uint8_t { Basic, AtLower, AtUpper, FreeZero };

class Simplex {
public:
    Simplex(const LinearProgram& lp, const SolverOptions& options, const std::vector<int>* start)
        : lp_(lp), opt_(options), m_(lp.row_count()), n_(lp.variable_count()), factor_(m_) {
        build();
        if (start) try_start(*start);
    }

    Solution run();

private:
    enum class Outcome { Optimal, Unbounded };

    void build();
    bool try_start(const std::vector<int>& start);
    void refactor();
    Outcome iterate();
    void price_all(Vector& y);
    void build_rows();
    void pivot_row(const Vector& rho);
    void perturb_bounds();
    void remove_perturbation();
    bool dual_cleanup();
    double dot_column(int j, const Vector& y) const {
        double s = 0.0;
        for (int k = cols_.start[j]; k < cols_.start[j + 1]; ++k) s += cols_.value[k] * y[cols_.row[k]];
        return s;
    }
    void load_column(int j, Vector& w) const {
        w.setZero();
        for (int k = cols_.start[j]; k < cols_.start[j + 1]; ++k) w[cols_.row[k]] = cols_.value[k];
    }
    std::vector<double> structural_values() const;

    const LinearProgram& lp_;
    SolverOptions opt_;
    int m_;
    int n_;
    Columns cols_;
    std::vector<double> lo_, up_, cost_, b_;
    std::vector<int> basis_;
    std::vector<State> state_;
    std::vector<double> x_;
    BasisFactor factor_;
    int first_artificial_ = 0;
    long iterations_ = 0;
    long max_iterations_ = 0;
    double rhs_norm_ = 0.0;
    std::vector<double> exact_lo_, exact_up_;
    std::vector<double> d_;       // reduced costs of the nonbasic columns
    std::vector<double> weight_;  // devex reference weights
    std::vector<int> row_start_, row_col_;
    std::vector<double> row_val_;
    std::vector<double> row_value_;
    std::vector<std::uint8_t> row_mark_;
    std::vector<int> touched_;
};

void Simplex::build() {
    // Structural columns, gathered from the row-wise program.
    std::vector<std::vector<std::pair<int, double>>> by_col(static_cast<std::size_t>(n_));
    b_.resize(static_cast<std::size_t>(m_));
    for (int i = 0; i < m_; ++i) {
        const auto& row = lp_.rows[static_cast<std::size_t>(i)];
        for (std::size_t k = 0; k < row.index.size(); ++k) {
            by_col[static_cast<std::size_t>(row.index[k])].emplace_back(i, row.value[k]);
        }
        b_[i] = row.rhs;
        rhs_norm_ = std::max(rhs_norm_, std::abs(row.rhs));
    }
    for (int j = 0; j < n_; ++j) {
        cols_.push(by_col[static_cast<std::size_t>(j)]);
        lo_.push_back(lp_.lower[j]);
        up_.push_back(lp_.upper[j]);
    }
    // Logical (slack) columns: a'x + s = b.
    for (int i = 0; i < m_; ++i) {
        cols_.push({{i, 1.0}});
        switch (lp_.rows[static_cast<std::size_t>(i)].sense) {
            case RowSense::LessEqual: lo_.push_back(0.0); up_.push_back(kInfinity); break;
            case RowSense::GreaterEqual: lo_.push_back(-kInfinity); up_.push_back(0.0); break;
            case RowSense::Equal: lo_.push_back(0.0); up_.push_back(0.0); break;
        }
    }

    const int logical_end = n_ + m_;
    state_.assign(static_cast<std::size_t>(logical_end), State::AtLower);
    x_.assign(static_cast<std::size_t>(logical_end), 0.0);
    for (int j = 0; j < n_; ++j) {
        if (std::isfinite(lo_[j])) {
            state_[j] = State::AtLower;
            x_[j] = lo_[j];
        } else if (std::isfinite(up_[j])) {
            state_[j] = State::AtUpper;
            x_[j] = up_[j];
        } else {
            state_[j] = State::FreeZero;
            x_[j] = 0.0;
        }
    }

    // Residual left for the logicals once structurals sit on their bounds.
    std::vector<double> residual = b_;
    for (int j = 0; j < n_; ++j) {
        if (x_[j] == 0.0) continue;
        for (int k = cols_.start[j]; k < cols_.start[j + 1]; ++k) residual[cols_.row[k]] -= cols_.value[k] * x_[j];
    }

    first_artificial_ = logical_end;
    basis_.resize(static_cast<std::size_t>(m_));
    for (int i = 0; i < m_; ++i) {
        const int slack = n_ + i;
        const double r = residual[i];
        if (r >= lo_[slack] && r <= up_[slack]) {
            basis_[i] = slack;
            state_[slack] = State::Basic;
            x_[slack] = r;
            continue;
        }
        // Slack stays at its (finite, zero) bound; an artificial absorbs the residual.
        state_[slack] = lo_[slack] == 0.0 ? State::AtLower : State::AtUpper;
        x_[slack] = 0.0;
        const int art = cols_.count();
        cols_.push({{i, r >= 0.0 ? 1.0 : -1.0}});
        lo_.push_back(0.0);
        up_.push_back(kInfinity);
        state_.push_back(State::Basic);
        x_.push_back(std::abs(r));
        basis_[i] = art;
    }
    max_iterations_ = opt_.max_iterations > 0
                          ? opt_.max_iterations
                          : 50L * (static_cast<long>(cols_.count()) + m_) + 10000L;
}

bool Simplex::try_start(const std::vector<int>& start) {
    if (static_cast<int>(start.size()) != m_) throw std::invalid_argument("start basis size differs from row count");
    std::vector<char> used(static_cast<std::size_t>(n_), 0);
    for (int j : start) {
        if (j < -1 || j >= n_) throw std::invalid_argument("start basis refers to an unknown column");
        if (j >= 0 && used[j]++) return false;
    }
    const int logical_end = n_ + m_;
    std::vector<int> basis(static_cast<std::size_t>(m_));
    std::vector<State> state(static_cast<std::size_t>(logical_end));
    std::vector<double> x(static_cast<std::size_t>(logical_end), 0.0);
    for (int j = 0; j < n_; ++j) {
        if (std::isfinite(lo_[j])) {
            state[j] = State::AtLower;
            x[j] = lo_[j];
        } else if (std::isfinite(up_[j])) {
            state[j] = State::AtUpper;
            x[j] = up_[j];
        } else {
            state[j] = State::FreeZero;
        }
    }
    for (int i = 0; i < m_; ++i) {
        const int slack = n_ + i;
        basis[i] = start[i] >= 0 ? start[i] : slack;
        if (start[i] >= 0) state[slack] = std::isfinite(lo_[slack]) ? State::AtLower : State::AtUpper;
        state[basis[i]] = State::Basic;
    }
    if (!factor_.factor(basis, cols_)) return false;

    Vector rhs(m_);
    for (int i = 0; i < m_; ++i) rhs[i] = b_[i];
    for (int j = 0; j < n_; ++j) {
        if (state[j] == State::Basic || x[j] == 0.0) continue;
        for (int k = cols_.start[j]; k < cols_.start[j + 1]; ++k) rhs[cols_.row[k]] -= cols_.value[k] * x[j];
    }
    factor_.ftran(rhs);
    for (int i = 0; i < m_; ++i) {
        const int j = basis[i];
        const double tol = opt_.feasibility_tol * (1.0 + std::abs(rhs[i]));
        if (rhs[i] < lo_[j] - tol || rhs[i] > up_[j] + tol) return false;
        x[j] = std::clamp(rhs[i], lo_[j], up_[j]);
    }

    // Feasible: drop the artificials and keep this basis.
    cols_.truncate(logical_end);
    lo_.resize(static_cast<std::size_t>(logical_end));
    up_.resize(static_cast<std::size_t>(logical_end));
    first_artificial_ = logical_end;
    basis_ = std::move(basis);
    state_ = std::move(state);
    x_ = std::move(x);
    max_iterations_ = opt_.max_iterations > 0 ? opt_.max_iterations
                                              : 50L * (static_cast<long>(logical_end) + m_) + 10000L;
    return true;
}

void Simplex::refactor() {
    if (!factor_.factor(basis_, cols_)) {
        throw NumericalFailure("simplex: basis matrix became singular");
    }
    Vector rhs(m_);
    for (int i = 0; i < m_; ++i) rhs[i] = b_[i];
    for (int j = 0; j < cols_.count(); ++j) {
        if (state_[j] == State::Basic || x_[j] == 0.0) continue;
        for (int k = cols_.start[j]; k < cols_.start[j + 1]; ++k) rhs[cols_.row[k]] -= cols_.value[k] * x_[j];
    }
    factor_.ftran(rhs);
    for (int i = 0; i < m_; ++i) x_[basis_[i]] = rhs[i];
}

// Row-wise copy of the constraint matrix, for pivot rows.
void Simplex::build_rows() {
    const int total = cols_.count();
    row_start_.assign(static_cast<std::size_t>(m_) + 1, 0);
    for (int k = 0; k < cols_.start[total]; ++k) ++row_start_[cols_.row[k] + 1];
    for (int i = 0; i < m_; ++i) row_start_[i + 1] += row_start_[i];
    row_col_.resize(static_cast<std::size_t>(cols_.start[total]));
    row_val_.resize(row_col_.size());
    std::vector<int> fill(row_start_.begin(), row_start_.end() - 1);
    for (int j = 0; j < total; ++j) {
        for (int k = cols_.start[j]; k < cols_.start[j + 1]; ++k) {
            const int at = fill[cols_.row[k]]++;
            row_col_[at] = j;
            row_val_[at] = cols_.value[k];
        }
    }
    row_value_.assign(static_cast<std::size_t>(total), 0.0);
    row_mark_.assign(static_cast<std::size_t>(total), 0);
}

// rho' A accumulated over the nonzeros of rho; results land in row_value_
// at the indices listed in touched_.
void Simplex::pivot_row(const Vector& rho) {
    touched_.clear();
    for (int i = 0; i < m_; ++i) {
        const double r = rho[i];
        if (std::abs(r) < 1e-13) continue;
        for (int k = row_start_[i]; k < row_start_[i + 1]; ++k) {
            const int j = row_col_[k];
            if (!row_mark_[j]) {
                row_mark_[j] = 1;
                touched_.push_back(j);
            }
            row_value_[j] += r * row_val_[k];
        }
    }
    for (int j : touched_) row_mark_[j] = 0;
}

void Simplex::price_all(Vector& y) {
    for (int i = 0; i < m_; ++i) y[i] = cost_[basis_[i]];
    factor_.btran(y);
    for (int j = 0; j < cols_.count(); ++j) d_[j] = state_[j] == State::Basic ? 0.0 : cost_[j] - dot_column(j, y);
}

Simplex::Outcome Simplex::iterate() {
    const int total = cols_.count();
    Vector y(m_);
    Vector alpha(m_);
    Vector rho(m_);
    d_.assign(static_cast<std::size_t>(total), 0.0);
    weight_.assign(static_cast<std::size_t>(total), 1.0);
    long degenerate_run = 0;
    bool bland = false;
    bool confirmed = false;
    bool fresh = false;

    while (true) {
        if (++iterations_ > max_iterations_) {
            throw NumericalFailure("simplex: iteration limit reached");
        }
        if (factor_.updates() >= opt_.refactor_interval) {
            refactor();
            fresh = false;
        }
        // Reduced costs are carried from pivot to pivot and recomputed
        // whenever the factorization is rebuilt.
        if (!fresh) {
            price_all(y);
            fresh = true;
        }

        // Devex pricing: largest d_j^2 / w_j; Bland takes the first candidate.
        int entering = -1;
        double best = 0.0;
        for (int j = 0; j < total; ++j) {
            const State s = state_[j];
            if (s == State::Basic || lo_[j] == up_[j]) continue;
            const double d = d_[j];
            const bool eligible = (s == State::AtLower && d < -opt_.optimality_tol) ||
                                  (s == State::AtUpper && d > opt_.optimality_tol) ||
                                  (s == State::FreeZero && std::abs(d) > opt_.optimality_tol);
            if (!eligible) continue;
            if (bland) {
                entering = j;
                break;
            }
            const double score = d * d / weight_[j];
            if (score > best) {
                best = score;
                entering = j;
            }
        }

        if (entering < 0) {
            // Confirm optimality against a fresh factorization before stopping.
            if (factor_.updates() > 0 && !confirmed) {
                refactor();
                fresh = false;
                confirmed = true;
                continue;
            }
            return Outcome::Optimal;
        }
        confirmed = false;

        const double entering_d = d_[entering];
        const double dir = entering_d < 0.0 ? 1.0 : -1.0;
        load_column(entering, alpha);
        factor_.ftran(alpha);

        // Harris two-pass ratio test (plain minimum ratio under Bland).
        const double relax = bland ? 0.0 : opt_.feasibility_tol;
        double theta_max = kInfinity;
        for (int i = 0; i < m_; ++i) {
            const double a = dir * alpha[i];
            if (std::abs(a) <= opt_.pivot_tol) continue;
            const int j = basis_[i];
            if (a > 0.0 && std::isfinite(lo_[j])) {
                theta_max = std::min(theta_max, (x_[j] - lo_[j] + relax) / a);
            } else if (a < 0.0 && std::isfinite(up_[j])) {
                theta_max = std::min(theta_max, (up_[j] - x_[j] + relax) / -a);
            }
        }
        const double flip = up_[entering] - lo_[entering];
        if (!std::isfinite(theta_max) && !std::isfinite(flip)) return Outcome::Unbounded;

        int leave = -1;
        double theta = 0.0;
        if (flip <= theta_max) {
            theta = flip;
        } else {
            double best_pivot = 0.0;
            int best_index = -1;
            for (int i = 0; i < m_; ++i) {
                const double a = dir * alpha[i];
                if (std::abs(a) <= opt_.pivot_tol) continue;
                const int j = basis_[i];
                double ratio;
                if (a > 0.0 && std::isfinite(lo_[j])) {
                    ratio = (x_[j] - lo_[j]) / a;
                } else if (a < 0.0 && std::isfinite(up_[j])) {
                    ratio = (up_[j] - x_[j]) / -a;
                } else {
                    continue;
                }
                if (ratio > theta_max) continue;
                const bool better = bland ? (best_index < 0 || j < best_index)
                                          : std::abs(a) > best_pivot;
                if (better) {
                    best_pivot = std::abs(a);
                    best_index = j;
                    leave = i;
                    theta = ratio;
                }
            }
            if (leave < 0) throw NumericalFailure("simplex: ratio test found no pivot");
            theta = std::max(theta, 0.0);
        }

        if (theta <= 1e-12) {
            if (++degenerate_run > 50) bland = true;
        } else {
            degenerate_run = 0;
            bland = false;
        }

        x_[entering] += dir * theta;
        if (theta != 0.0) {
            for (int i = 0; i < m_; ++i) x_[basis_[i]] -= dir * theta * alpha[i];
        }

        if (leave < 0) {
            // Entering variable runs to its opposite bound; basis unchanged.
            if (dir > 0.0) {
                state_[entering] = State::AtUpper;
                x_[entering] = up_[entering];
            } else {
                state_[entering] = State::AtLower;
                x_[entering] = lo_[entering];
            }
            continue;
        }

        // Pivot row of B^-1 A updates the reduced costs and the weights.
        const double pivot = alpha[leave];
        rho.setZero();
        rho[leave] = 1.0;
        factor_.btran(rho);
        pivot_row(rho);
        const double step = entering_d / pivot;
        const double w_q = weight_[entering];
        double w_max = 0.0;
        for (int j : touched_) {
            const double a = row_value_[j];
            row_value_[j] = 0.0;
            if (state_[j] == State::Basic || j == entering || a == 0.0) continue;
            d_[j] -= step * a;
            const double ratio = a / pivot;
            weight_[j] = std::max(weight_[j], ratio * ratio * w_q);
            w_max = std::max(w_max, weight_[j]);
        }

        const int leaving = basis_[leave];
        if (dir * pivot > 0.0) {
            state_[leaving] = State::AtLower;
            x_[leaving] = lo_[leaving];
        } else {
            state_[leaving] = State::AtUpper;
            x_[leaving] = up_[leaving];
        }
        d_[leaving] = -step;
        weight_[leaving] = std::max(w_q / (pivot * pivot), 1.0);
        d_[entering] = 0.0;
        basis_[leave] = entering;
        state_[entering] = State::Basic;
        factor_.push_eta(leave, alpha);
        if (w_max > 1e6) std::fill(weight_.begin(), weight_.end(), 1.0);
    }
}

// Widens every bound a basic variable could run into by a tiny random
// amount, so that ties in the ratio test become rare.
void Simplex::perturb_bounds() {
    exact_lo_ = lo_;
    exact_up_ = up_;
    std::mt19937_64 gen(0x5eedULL);
    for (int j = 0; j < first_artificial_; ++j) {
        if (j < n_ && lo_[j] == up_[j]) continue;
        const double scale = opt_.perturbation * (1.0 + static_cast<double>(gen() >> 11) * 0x1.0p-53);
        const State s = state_[j];
        if (std::isfinite(lo_[j]) && s != State::AtLower) lo_[j] -= scale * (1.0 + std::abs(lo_[j]));
        if (std::isfinite(up_[j]) && s != State::AtUpper) up_[j] += scale * (1.0 + std::abs(up_[j]));
    }
}

void Simplex::remove_perturbation() {
    lo_ = exact_lo_;
    up_ = exact_up_;
    for (int j = 0; j < cols_.count(); ++j) {
        if (state_[j] == State::AtLower) x_[j] = lo_[j];
        if (state_[j] == State::AtUpper) x_[j] = up_[j];
    }
    refactor();
}

// Dual simplex pivots from a dual feasible basis until the basic values are
// back within their bounds. False if some row cannot be repaired.
bool Simplex::dual_cleanup() {
    const int total = cols_.count();
    Vector y(m_);
    Vector rho(m_);
    Vector alpha(m_);
    const double tol = opt_.feasibility_tol;
    while (true) {
        if (++iterations_ > max_iterations_) throw NumericalFailure("simplex: iteration limit reached");
        if (factor_.updates() >= opt_.refactor_interval) refactor();

        int r = -1;
        double worst = 0.0;
        for (int i = 0; i < m_; ++i) {
            const int j = basis_[i];
            const double v = std::max(lo_[j] - x_[j], x_[j] - up_[j]);
            if (v > tol && v > worst) {
                worst = v;
                r = i;
            }
        }
        if (r < 0) return true;
        const int leaving = basis_[r];
        const bool raise = x_[leaving] < lo_[leaving];

        for (int i = 0; i < m_; ++i) y[i] = cost_[basis_[i]];
        factor_.btran(y);
        rho.setZero();
        rho[r] = 1.0;
        factor_.btran(rho);

        // x_r moves by -a * dx_j when nonbasic j moves by dx_j.
        int entering = -1;
        double best_ratio = kInfinity;
        double best_alpha = 0.0;
        for (int j = 0; j < total; ++j) {
            const State s = state_[j];
            if (s == State::Basic || lo_[j] == up_[j]) continue;
            const double a = dot_column(j, rho);
            if (std::abs(a) <= opt_.pivot_tol) continue;
            const bool helps = s == State::FreeZero || (s == State::AtLower && (raise ? a < 0.0 : a > 0.0)) ||
                               (s == State::AtUpper && (raise ? a > 0.0 : a < 0.0));
            if (!helps) continue;
            const double d = cost_[j] - dot_column(j, y);
            const double slack = s == State::AtLower ? d : s == State::AtUpper ? -d : std::abs(d);
            const double ratio = std::max(slack, 0.0) / std::abs(a);
            if (ratio < best_ratio - 1e-12 || (ratio <= best_ratio + 1e-12 && std::abs(a) > best_alpha)) {
                best_ratio = ratio;
                best_alpha = std::abs(a);
                entering = j;
            }
        }
        if (entering < 0) return false;

        load_column(entering, alpha);
        factor_.ftran(alpha);
        if (std::abs(alpha[r]) <= opt_.pivot_tol) return false;
        const double target = raise ? lo_[leaving] : up_[leaving];
        const double theta = (x_[leaving] - target) / alpha[r];
        x_[entering] += theta;
        for (int i = 0; i < m_; ++i) x_[basis_[i]] -= theta * alpha[i];
        state_[leaving] = raise ? State::AtLower : State::AtUpper;
        x_[leaving] = target;
        basis_[r] = entering;
        state_[entering] = State::Basic;
        factor_.push_eta(r, alpha);
    }
}

std::vector<double> Simplex::structural_values() const {
    std::vector<double> x(x_.begin(), x_.begin() + n_);
    for (int j = 0; j < n_; ++j) x[j] = std::clamp(x[j], lo_[j], up_[j]);
    return x;
}

Solution Simplex::run() {
    Solution sol;
    build_rows();
    refactor();

    const int total = cols_.count();
    if (first_artificial_ < total) {
        cost_.assign(static_cast<std::size_t>(total), 0.0);
        for (int j = first_artificial_; j < total; ++j) cost_[j] = 1.0;
        iterate();
        refactor();
        double infeasibility = 0.0;
        for (int j = first_artificial_; j < total; ++j) infeasibility += std::max(0.0, x_[j]);
        if (infeasibility > opt_.feasibility_tol * (1.0 + rhs_norm_)) {
            sol.status = SolveStatus::Infeasible;
            sol.iterations = iterations_;
            return sol;
        }
        // Artificials are pinned to zero for the rest of the solve.
        for (int j = first_artificial_; j < total; ++j) {
            up_[j] = 0.0;
            if (state_[j] != State::Basic) {
                state_[j] = State::AtLower;
                x_[j] = 0.0;
            }
        }
    }

    cost_.assign(static_cast<std::size_t>(total), 0.0);
    for (int j = 0; j < n_; ++j) cost_[j] = lp_.cost[j];
    const bool perturbed = opt_.perturbation > 0.0;
    if (perturbed) perturb_bounds();
    if (iterate() == Outcome::Unbounded) {
        sol.status = SolveStatus::Unbounded;
        sol.iterations = iterations_;
        return sol;
    }
    if (perturbed) {
        remove_perturbation();
        if (!dual_cleanup()) throw NumericalFailure("simplex: could not restore the exact bounds");
        if (iterate() == Outcome::Unbounded) {
            sol.status = SolveStatus::Unbounded;
            sol.iterations = iterations_;
            return sol;
        }
    }

    sol.values = structural_values();
    const double tol = opt_.feasibility_tol;
    if (relative_primal_residual(lp_, sol.values) > tol) {
        refactor();
        sol.values = structural_values();
        if (relative_primal_residual(lp_, sol.values) > tol) {
            throw NumericalFailure("simplex: primal residual above tolerance at optimum");
        }
    }
    sol.status = SolveStatus::Optimal;
    sol.objective = 0.0;
    for (int j = 0; j < n_; ++j) sol.objective += lp_.cost[j] * sol.values[j];
    sol.iterations = iterations_;
    return sol;
}

}  // namespace

namespace {

// No rows: every variable goes to its cheaper bound.
Solution solve_bounds_only(const LinearProgram& program) {
    Solution sol;
    sol.status = SolveStatus::Optimal;
    for (int j = 0; j < program.variable_count(); ++j) {
        const double c = program.cost[j];
        const double lo = program.lower[j];
        const double up = program.upper[j];
        double x = c > 0.0 ? lo : c < 0.0 ? up : (std::isfinite(lo) ? lo : std::isfinite(up) ? up : 0.0);
        if (!std::isfinite(x)) return {SolveStatus::Unbounded, {}, 0.0, 0};
        sol.values.push_back(x);
        sol.objective += c * x;
    }
    return sol;
}

}  // namespace

Solution solve_lp(const LinearProgram& program, const SolverOptions& options) {
    program.validate();
    if (program.row_count() == 0) return solve_bounds_only(program);
    Simplex simplex(program, options, nullptr);
    return simplex.run();
}

Solution solve_lp(const LinearProgram& program, const SolverOptions& options,
                  const std::vector<int>& start_basis) {
    program.validate();
    if (program.row_count() == 0) return solve_bounds_only(program);
    Simplex simplex(program, options, &start_basis);
    return simplex.run();
}

void write_lp_text(std::ostream& out, const LinearProgram& program) {
    auto var = [&](int j) {
        const auto& n = program.names;
        return (j < static_cast<int>(n.size()) && !n[j].empty()) ? n[j] : "x" + std::to_string(j);
    };
    const auto old_precision = out.precision(17);
    out << "minimize\n obj:";
    for (int j = 0; j < program.variable_count(); ++j) {
        if (program.cost[j] != 0.0) out << ' ' << std::showpos << program.cost[j] << std::noshowpos << ' ' << var(j);
    }
    out << "\nsubject to\n";
    for (int i = 0; i < program.row_count(); ++i) {
        const auto& row = program.rows[static_cast<std::size_t>(i)];
        out << ' ' << (row.name.empty() ? "r" + std::to_string(i) : row.name) << ':';
        for (std::size_t k = 0; k < row.index.size(); ++k) {
            out << ' ' << std::showpos << row.value[k] << std::noshowpos << ' ' << var(row.index[k]);
        }
        const char* op = row.sense == RowSense::LessEqual ? "<=" : row.sense == RowSense::Equal ? "=" : ">=";
        out << ' ' << op << ' ' << row.rhs << '\n';
    }
    out << "bounds\n";
    for (int j = 0; j < program.variable_count(); ++j) {
        out << ' ' << program.lower[j] << " <= " << var(j) << " <= " << program.upper[j] << '\n';
    }
    out << "end\n";
    out.precision(old_precision);
}

}  // namespace gridshare
