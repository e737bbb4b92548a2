#include "mamdp/markov.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "mamdp/mdp.hpp"

namespace mamdp {

namespace {

constexpr double kSupportEps = 0.0;  // any strictly positive entry is an edge

// Iterative Tarjan strongly-connected components on the support graph.
std::vector<int> scc_of(const Matrix& chain, int& n_scc) {
    const int n = static_cast<int>(chain.rows());
    std::vector<int> index(n, -1), low(n, 0), comp(n, -1);
    std::vector<bool> on_stack(n, false);
    std::vector<int> stack;
    int next_index = 0;
    n_scc = 0;

    struct Frame {
        int v;
        int next_w;
    };
    for (int root = 0; root < n; ++root) {
        if (index[root] != -1) continue;
        std::vector<Frame> call_stack{{root, 0}};
        index[root] = low[root] = next_index++;
        stack.push_back(root);
        on_stack[root] = true;
        while (!call_stack.empty()) {
            Frame& f = call_stack.back();
            int v = f.v;
            bool descended = false;
            while (f.next_w < n) {
                int w = f.next_w++;
                if (chain(v, w) <= kSupportEps) continue;
                if (index[w] == -1) {
                    index[w] = low[w] = next_index++;
                    stack.push_back(w);
                    on_stack[w] = true;
                    call_stack.push_back({w, 0});
                    descended = true;
                    break;
                }
                if (on_stack[w]) low[v] = std::min(low[v], index[w]);
            }
            if (descended) continue;
            if (low[v] == index[v]) {
                while (true) {
                    int w = stack.back();
                    stack.pop_back();
                    on_stack[w] = false;
                    comp[w] = n_scc;
                    if (w == v) break;
                }
                ++n_scc;
            }
            call_stack.pop_back();
            if (!call_stack.empty()) {
                int parent = call_stack.back().v;
                low[parent] = std::min(low[parent], low[v]);
            }
        }
    }
    return comp;
}

// gcd of cycle lengths within one strongly connected component, via BFS levels.
bool component_aperiodic(const Matrix& chain, const std::vector<int>& members) {
    const int n = static_cast<int>(chain.rows());
    std::vector<int> dist(n, -1);
    std::vector<int> queue{members.front()};
    dist[members.front()] = 0;
    std::vector<bool> in_comp(n, false);
    for (int s : members) in_comp[s] = true;
    for (std::size_t qi = 0; qi < queue.size(); ++qi) {
        int v = queue[qi];
        for (int w = 0; w < n; ++w) {
            if (chain(v, w) <= kSupportEps || !in_comp[w]) continue;
            if (dist[w] == -1) {
                dist[w] = dist[v] + 1;
                queue.push_back(w);
            }
        }
    }
    long long g = 0;
    for (int v : members) {
        for (int w = 0; w < n; ++w) {
            if (chain(v, w) <= kSupportEps || !in_comp[w]) continue;
            g = std::gcd(g, static_cast<long long>(std::abs(dist[v] + 1 - dist[w])));
        }
    }
    return g == 1;
}

void require_square_stochastic(const Matrix& chain) {
    if (chain.rows() != chain.cols()) throw NotSquare("matrix is not square");
    for (int s = 0; s < chain.rows(); ++s) {
        double sum = chain.row(s).sum();
        if (std::abs(sum - 1.0) > 1e-9)
            throw NotADistribution("chain row " + std::to_string(s) + " sums to " +
                                   std::to_string(sum));
        if (chain.row(s).minCoeff() < -1e-12)
            throw NegativeProbability("chain row " + std::to_string(s) +
                                      " has a negative entry");
    }
}

}  // namespace

ChainClasses chain_classes(const Matrix& chain) {
    const int n = static_cast<int>(chain.rows());
    int n_scc = 0;
    std::vector<int> comp = scc_of(chain, n_scc);
    std::vector<std::vector<int>> members(n_scc);
    for (int s = 0; s < n; ++s) members[comp[s]].push_back(s);
    std::vector<bool> closed(n_scc, true);
    for (int s = 0; s < n; ++s)
        for (int t = 0; t < n; ++t)
            if (chain(s, t) > kSupportEps && comp[t] != comp[s]) closed[comp[s]] = false;

    ChainClasses out;
    out.class_of.assign(n, -1);
    for (int c = 0; c < n_scc; ++c) {
        if (!closed[c]) continue;
        int id = static_cast<int>(out.closed_classes.size());
        for (int s : members[c]) out.class_of[s] = id;
        out.closed_classes.push_back(members[c]);
    }
    return out;
}

StationaryDistribution stationary_distribution(const Matrix& chain) {
    require_square_stochastic(chain);
    const int n = static_cast<int>(chain.rows());
    ChainClasses classes = chain_classes(chain);
    if (classes.closed_classes.size() != 1) throw NotErgodic();

    // Stacked system [P^T - I; 1^T] q = [0; 1], solved in the least-squares
    // sense — equivalent to replacing one redundant balance equation with the
    // normalization row, but insensitive to which equation is redundant.
    Matrix a(n + 1, n);
    a.topRows(n) = chain.transpose() - Matrix::Identity(n, n);
    a.row(n).setOnes();
    Vector b = Vector::Zero(n + 1);
    b(n) = 1.0;
    Vector q = a.colPivHouseholderQr().solve(b);

    double residual = (q.transpose() * chain - q.transpose()).cwiseAbs().maxCoeff();
    if (!q.allFinite() || residual > 1e-10)
        throw SingularSystem("stationary solve residual " + std::to_string(residual));
    if (q.minCoeff() < -1e-10) throw SingularSystem("stationary solve produced negative mass");
    q = q.cwiseMax(0.0);
    q /= q.sum();
    return {q};
}

double total_variation(const Vector& mu, const Vector& nu) {
    if (mu.size() != nu.size()) throw LengthMismatch("distributions have different lengths");
    for (const Vector* v : {&mu, &nu}) {
        if (std::abs(v->sum() - 1.0) > 1e-9 || v->minCoeff() < -1e-12)
            throw NotADistribution("input does not sum to 1 (or has negative mass)");
    }
    return 0.5 * (mu - nu).lpNorm<1>();
}

double ergodicity_coefficient(const Matrix& m) {
    if (m.rows() != m.cols()) throw NotSquare("ergodicity coefficient needs a square matrix");
    double best = 0.0;
    for (int i = 0; i < m.rows(); ++i)
        for (int j = i + 1; j < m.rows(); ++j)
            best = std::max(best, 0.5 * (m.row(i) - m.row(j)).lpNorm<1>());
    return best;
}

Matrix group_inverse(const Matrix& chain, const StationaryDistribution& q) {
    const int n = static_cast<int>(chain.rows());
    if (chain.rows() != chain.cols()) throw NotSquare("group inverse needs a square matrix");
    if (q.probs.size() != n) throw LengthMismatch("stationary vector length mismatch");

    Matrix ones_qt = Vector::Ones(n) * q.probs.transpose();
    Matrix a = Matrix::Identity(n, n) - chain + ones_qt;
    Eigen::PartialPivLU<Matrix> lu(a);
    Matrix z_sharp = lu.solve(Matrix::Identity(n, n)) - ones_qt;
    if (!z_sharp.allFinite()) throw SingularSystem("group-inverse solve failed");

    Matrix z = Matrix::Identity(n, n) - chain;
    double residual = (z * z_sharp * z - z).cwiseAbs().maxCoeff();
    residual = std::max(residual, (z_sharp * z * z_sharp - z_sharp).cwiseAbs().maxCoeff());
    residual = std::max(residual, (z_sharp * z - z * z_sharp).cwiseAbs().maxCoeff());
    if (residual > 1e-9) throw IdentityCheckFailed(residual);
    return z_sharp;
}

PerturbationGap perturbation_gap_bound(const Matrix& p, const Matrix& p_prime) {
    if (p.rows() != p_prime.rows() || p.cols() != p_prime.cols())
        throw LengthMismatch("chain dimensions differ");
    StationaryDistribution q = stationary_distribution(p);
    StationaryDistribution q_prime = stationary_distribution(p_prime);
    Matrix z_sharp = group_inverse(p, q);

    // Matrix 1-norm in the max-absolute-row-sum sense.
    double row_norm = (p - p_prime).cwiseAbs().rowwise().sum().maxCoeff();
    PerturbationGap gap;
    gap.bound = 0.5 * ergodicity_coefficient(z_sharp) * row_norm;
    gap.actual = total_variation(q.probs, q_prime.probs);
    return gap;
}

ErgodicityFlags ergodicity_check(const Matrix& chain) {
    int n_scc = 0;
    std::vector<int> comp = scc_of(chain, n_scc);
    ErgodicityFlags flags;
    flags.irreducible = (n_scc == 1);
    ChainClasses classes = chain_classes(chain);
    flags.n_closed_classes = static_cast<int>(classes.closed_classes.size());
    flags.aperiodic = true;
    for (const auto& members : classes.closed_classes)
        if (!component_aperiodic(chain, members)) flags.aperiodic = false;
    if (classes.closed_classes.empty()) flags.aperiodic = false;
    return flags;
}

ErgodicityReport estimate_chain_sensitivity(const JointMDP& mdp, int n_samples,
                                            std::uint64_t seed) {
    if (n_samples < 1) throw std::invalid_argument("n_samples must be >= 1");
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> pick(0, mdp.n_actions - 1);

    ErgodicityReport report;
    report.is_estimate = true;
    bool any = false;
    for (int k = 0; k < n_samples; ++k) {
        std::vector<int> choice(mdp.n_states);
        for (int s = 0; s < mdp.n_states; ++s) choice[s] = pick(rng);
        Matrix chain = induced_chain(mdp, StationaryPolicy::det(std::move(choice)));
        StationaryDistribution q;
        try {
            q = stationary_distribution(chain);
        } catch (const NotErgodic&) {
            ++report.n_skipped_non_ergodic;
            continue;
        }
        double coeff = ergodicity_coefficient(group_inverse(chain, q));
        ++report.n_policies_sampled;
        if (!any || coeff > report.max_coefficient) {
            report.max_coefficient = coeff;
            report.lambda1_group_inverse = coeff;
            report.lambda1_chain = ergodicity_coefficient(chain);
            any = true;
        }
    }
    if (!any) throw AllSampledPoliciesNonErgodic();
    return report;
}

}  // namespace mamdp
