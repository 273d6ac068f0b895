#include "platoon/graph.hpp"

#include <algorithm>
#include <queue>
#include <sstream>

namespace platoon {

Topology Topology::make(Eigen::MatrixXi adjacency, Eigen::VectorXi pinning) {
    const auto n = pinning.size();
    if (n < 1) {
        throw std::invalid_argument("topology needs at least one follower");
    }
    if (adjacency.rows() != n || adjacency.cols() != n) {
        throw std::invalid_argument("adjacency must be n x n with n = pinning length");
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        if (pinning(i) != 0 && pinning(i) != 1) {
            throw std::invalid_argument("pinning entries must be 0 or 1");
        }
        for (Eigen::Index j = 0; j < n; ++j) {
            const int a = adjacency(i, j);
            if (a != 0 && a != 1) {
                throw std::invalid_argument("adjacency entries must be 0 or 1");
            }
            if (i == j && a != 0) {
                throw std::invalid_argument("adjacency diagonal must be zero (no self-loop)");
            }
        }
    }
    return Topology{std::move(adjacency), std::move(pinning)};
}

TopologyKind topology_kind_from_string(const std::string& name) {
    if (name == "PF") return TopologyKind::PF;
    if (name == "PLF") return TopologyKind::PLF;
    if (name == "TPF") return TopologyKind::TPF;
    if (name == "TPLF") return TopologyKind::TPLF;
    throw std::invalid_argument("unknown topology kind: " + name);
}

std::string to_string(TopologyKind kind) {
    switch (kind) {
        case TopologyKind::PF: return "PF";
        case TopologyKind::PLF: return "PLF";
        case TopologyKind::TPF: return "TPF";
        case TopologyKind::TPLF: return "TPLF";
    }
    throw std::invalid_argument("unknown topology kind");
}

Topology standard_topology(TopologyKind kind, int n) {
    if (n < 1) {
        throw std::invalid_argument("follower count must be at least 1");
    }
    Eigen::MatrixXi adjacency = Eigen::MatrixXi::Zero(n, n);
    Eigen::VectorXi pinning = Eigen::VectorXi::Zero(n);

    for (int i = 1; i < n; ++i) {
        adjacency(i, i - 1) = 1;
    }
    pinning(0) = 1;

    const bool two_pred = kind == TopologyKind::TPF || kind == TopologyKind::TPLF;
    if (two_pred) {
        for (int i = 2; i < n; ++i) {
            adjacency(i, i - 2) = 1;
        }
        // Vehicle 2's second predecessor is the leader.
        if (n >= 2) {
            pinning(1) = 1;
        }
    }
    if (kind == TopologyKind::PLF || kind == TopologyKind::TPLF) {
        pinning.setOnes();
    }
    return Topology{std::move(adjacency), std::move(pinning)};
}

Eigen::MatrixXd laplacian(const Topology& t) {
    const int n = t.size();
    Eigen::MatrixXd l = -t.adjacency.cast<double>();
    for (int i = 0; i < n; ++i) {
        l(i, i) = t.adjacency.row(i).sum();
    }
    return l;
}

Eigen::MatrixXd grounded_matrix(const Topology& t) {
    Eigen::MatrixXd g = laplacian(t);
    g.diagonal() += t.pinning.cast<double>();
    return g;
}

Eigen::VectorXd degree_plus_pinning(const Topology& t) {
    const int n = t.size();
    Eigen::VectorXd d(n);
    for (int i = 0; i < n; ++i) {
        d(i) = t.adjacency.row(i).sum() + t.pinning(i);
    }
    return d;
}

namespace {

// A witness cycle among the vertices left over by Kahn's algorithm. Every
// remaining vertex has an in-neighbor among the remaining set, so walking
// in-neighbors must revisit a vertex.
std::vector<int> find_cycle(const Topology& t, const std::vector<bool>& remaining) {
    const int n = t.size();
    int start = -1;
    for (int i = 0; i < n; ++i) {
        if (remaining[i]) {
            start = i;
            break;
        }
    }
    std::vector<int> path;
    std::vector<int> position(n, -1);
    int v = start;
    while (position[v] < 0) {
        position[v] = static_cast<int>(path.size());
        path.push_back(v);
        for (int j = 0; j < n; ++j) {
            if (remaining[j] && t.adjacency(v, j) == 1) {
                v = j;
                break;
            }
        }
    }
    return {path.begin() + position[v], path.end()};
}

}  // namespace

Permutation topological_order(const Topology& t) {
    const int n = t.size();
    std::vector<int> in_degree(n, 0);
    for (int i = 0; i < n; ++i) {
        in_degree[i] = t.adjacency.row(i).sum();
    }

    std::priority_queue<int, std::vector<int>, std::greater<int>> frontier;
    for (int i = 0; i < n; ++i) {
        if (in_degree[i] == 0) frontier.push(i);
    }

    Permutation result;
    result.order.reserve(n);
    while (!frontier.empty()) {
        const int v = frontier.top();
        frontier.pop();
        result.order.push_back(v);
        for (int i = 0; i < n; ++i) {
            if (t.adjacency(i, v) == 1 && --in_degree[i] == 0) {
                frontier.push(i);
            }
        }
    }

    if (static_cast<int>(result.order.size()) < n) {
        std::vector<bool> remaining(n, true);
        for (int v : result.order) remaining[v] = false;
        auto cycle = find_cycle(t, remaining);
        std::ostringstream msg;
        msg << "topology is not a DAG; witness cycle:";
        for (int v : cycle) msg << ' ' << v + 1;
        throw CyclicGraphError(msg.str(), std::move(cycle));
    }
    return result;
}

Eigen::MatrixXd permutation_matrix(const Permutation& p) {
    const int n = p.size();
    std::vector<bool> seen(n, false);
    for (int v : p.order) {
        if (v < 0 || v >= n || seen[v]) {
            throw std::invalid_argument("order is not a permutation");
        }
        seen[v] = true;
    }
    Eigen::MatrixXd q = Eigen::MatrixXd::Zero(n, n);
    for (int col = 0; col < n; ++col) {
        q(p.order[col], col) = 1.0;
    }
    return q;
}

std::vector<bool> pinning_condition(const Topology& t) {
    const Eigen::VectorXd d = degree_plus_pinning(t);
    std::vector<bool> ok(t.size());
    for (int i = 0; i < t.size(); ++i) {
        ok[i] = d(i) > 0.0;
    }
    return ok;
}

}  // namespace platoon
