#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace platoon {

/// Follower-to-follower communication graph plus leader pinning flags.
///
/// adjacency(i, j) == 1 means follower i receives follower j's state;
/// pinning(i) == 1 means follower i receives the leader's state.
/// Entries are restricted to {0, 1} and the diagonal must be zero.
struct Topology {
    Eigen::MatrixXi adjacency;
    Eigen::VectorXi pinning;

    int size() const { return static_cast<int>(pinning.size()); }

    /// Validating constructor; throws std::invalid_argument on a malformed graph.
    static Topology make(Eigen::MatrixXi adjacency, Eigen::VectorXi pinning);
};

enum class TopologyKind { PF, PLF, TPF, TPLF };

TopologyKind topology_kind_from_string(const std::string& name);
std::string to_string(TopologyKind kind);

/// Vertex ordering {s_1, ..., s_N}; a bijection on {0, ..., N-1} (0-based).
struct Permutation {
    std::vector<int> order;

    int size() const { return static_cast<int>(order.size()); }
};

/// Thrown when a directed cycle makes a DAG-only operation invalid.
/// `cycle` holds one witness cycle (0-based vertex indices, first != last).
class CyclicGraphError : public std::runtime_error {
public:
    CyclicGraphError(std::string message, std::vector<int> cycle)
        : std::runtime_error(std::move(message)), cycle_(std::move(cycle)) {}

    const std::vector<int>& cycle() const { return cycle_; }

private:
    std::vector<int> cycle_;
};

/// Builds one of the four standard unidirectional topologies for n followers.
///
/// PF: each follower listens to its predecessor, vehicle 1 to the leader.
/// PLF: PF plus a leader link for every follower.
/// TPF: two predecessors each; vehicle 2's missing second predecessor is the
///      leader, so both vehicles 1 and 2 are pinned.
/// TPLF: TPF plus a leader link for every follower.
Topology standard_topology(TopologyKind kind, int n);

/// Laplacian L = D - A of the follower graph. Row sums are exactly zero.
Eigen::MatrixXd laplacian(const Topology& t);

/// Grounded matrix G = L + P coupling followers and leader.
Eigen::MatrixXd grounded_matrix(const Topology& t);

/// Per-follower d_ii + p_ii (in-degree plus pinning flag).
Eigen::VectorXd degree_plus_pinning(const Topology& t);

/// Topological order such that the permuted adjacency is strictly lower
/// triangular. Deterministic: among admissible next vertices the smallest
/// original index is chosen. Throws CyclicGraphError if the graph has a
/// directed cycle.
Permutation topological_order(const Topology& t);

/// Q = [e_{s_1}, ..., e_{s_N}] for the given ordering.
Eigen::MatrixXd permutation_matrix(const Permutation& p);

/// Entry i is true iff follower i hears at least one other node (d_ii + p_ii > 0).
std::vector<bool> pinning_condition(const Topology& t);

}  // namespace platoon
