#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

namespace meshfree {

enum class NodeKind { Interior, Boundary };
enum class Distribution { Uniform, Chebyshev };

struct Node {
    double x = 0.0;
    double y = 0.0;
    int index = -1;
    NodeKind kind = NodeKind::Interior;
};

/// Axis-aligned rectangle [x_lo, x_hi] x [y_lo, y_hi].
struct Rect {
    double x_lo = 0.0, x_hi = 1.0;
    double y_lo = 0.0, y_hi = 1.0;

    double width() const { return x_hi - x_lo; }
    double height() const { return y_hi - y_lo; }
    bool degenerate() const { return !(x_hi > x_lo) || !(y_hi > y_lo); }
};

/// Scattered discretization of the closed rectangle: ordered nodes with
/// boundary flags.  Immutable after construction; construction validates
/// the invariants (contiguous indices, pairwise-distinct coordinates,
/// boundary flag iff the node lies on an edge within 1e-12).
class NodeSet {
public:
    NodeSet(std::vector<Node> nodes, Rect domain, Distribution distribution);

    const std::vector<Node>& nodes() const { return nodes_; }
    const Node& operator[](int i) const { return nodes_[i]; }
    int size() const { return static_cast<int>(nodes_.size()); }
    const Rect& domain() const { return domain_; }
    Distribution distribution() const { return distribution_; }

    std::vector<int> interior_indices() const;
    std::vector<int> boundary_indices() const;
    int interior_count() const;

private:
    std::vector<Node> nodes_;
    Rect domain_;
    Distribution distribution_;
};

/// Central node plus its selected neighbors.  Offsets are the exact
/// coordinate differences neighbor - center, in neighbor order.
struct Star {
    int center = -1;
    std::vector<int> neighbors;
    std::vector<std::array<double, 2>> offsets;

    int size() const { return static_cast<int>(neighbors.size()) + 1; }
};

/// Tensor grid with equal spacing per axis; nx*ny nodes.
NodeSet generate_uniform(int nx, int ny, const Rect& domain);

/// Tensor grid of Chebyshev abscissae x_i = (1 - cos(i*pi/(n-1)))/2 mapped
/// affinely onto each domain axis; endpoints land exactly on the boundary.
NodeSet generate_chebyshev(int nx, int ny, const Rect& domain);

/// Selects the star of an interior node by the quadrant rule: the nearest
/// node (N=5) or two nearest nodes (N=9) in each of the four half-open
/// angular sectors [0,90), [90,180), [180,270), [270,360) around the center.
/// Distance ties break toward the lower node index.
Star select_star(const NodeSet& node_set, int center, int star_size);

/// Fill-style nodal spacing h = max_i min_{j != i} |x_i - x_j| (brute force).
double nodal_spacing(const NodeSet& node_set);

// Node-set CSV: header "index,x,y,kind", 17 significant digits.
void write_nodes_csv(const NodeSet& node_set, std::ostream& out);
NodeSet read_nodes_csv(std::istream& in);
void write_nodes_csv_file(const NodeSet& node_set, const std::string& path);
NodeSet read_nodes_csv_file(const std::string& path);

}  // namespace meshfree
