#include "meshfree/nodes.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "meshfree/errors.hpp"

namespace meshfree {

namespace {

constexpr double kBoundaryTol = 1e-12;
constexpr double kCoincidentTol = 1e-12;

bool on_boundary(const Node& n, const Rect& d) {
    return std::abs(n.x - d.x_lo) <= kBoundaryTol || std::abs(n.x - d.x_hi) <= kBoundaryTol ||
           std::abs(n.y - d.y_lo) <= kBoundaryTol || std::abs(n.y - d.y_hi) <= kBoundaryTol;
}

}  // namespace

NodeSet::NodeSet(std::vector<Node> nodes, Rect domain, Distribution distribution)
    : nodes_(std::move(nodes)), domain_(domain), distribution_(distribution) {
    if (domain_.degenerate()) throw std::invalid_argument("NodeSet: degenerate domain rectangle");
    const int n = static_cast<int>(nodes_.size());
    for (int i = 0; i < n; ++i) {
        const Node& nd = nodes_[i];
        if (nd.index != i)
            throw std::invalid_argument("NodeSet: node indices must be 0..n-1 in order");
        if (nd.x < domain_.x_lo - kBoundaryTol || nd.x > domain_.x_hi + kBoundaryTol ||
            nd.y < domain_.y_lo - kBoundaryTol || nd.y > domain_.y_hi + kBoundaryTol)
            throw std::invalid_argument("NodeSet: node " + std::to_string(i) +
                                        " lies outside the domain");
        const bool bnd = on_boundary(nd, domain_);
        if (bnd != (nd.kind == NodeKind::Boundary))
            throw std::invalid_argument("NodeSet: boundary flag of node " + std::to_string(i) +
                                        " disagrees with its position");
    }
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            const double dx = nodes_[i].x - nodes_[j].x, dy = nodes_[i].y - nodes_[j].y;
            if (std::hypot(dx, dy) <= kCoincidentTol)
                throw std::invalid_argument("NodeSet: nodes " + std::to_string(i) + " and " +
                                            std::to_string(j) + " coincide");
        }
}

std::vector<int> NodeSet::interior_indices() const {
    std::vector<int> out;
    for (const Node& n : nodes_)
        if (n.kind == NodeKind::Interior) out.push_back(n.index);
    return out;
}

std::vector<int> NodeSet::boundary_indices() const {
    std::vector<int> out;
    for (const Node& n : nodes_)
        if (n.kind == NodeKind::Boundary) out.push_back(n.index);
    return out;
}

int NodeSet::interior_count() const {
    int c = 0;
    for (const Node& n : nodes_)
        if (n.kind == NodeKind::Interior) ++c;
    return c;
}

namespace {

NodeSet tensor_grid(int nx, int ny, const Rect& d, Distribution dist,
                    const std::function<double(int, int)>& abscissa) {
    if (nx < 2 || ny < 2) throw std::invalid_argument("node generation: counts must be >= 2");
    if (d.degenerate()) throw std::invalid_argument("node generation: degenerate domain");
    std::vector<double> xs(nx), ys(ny);
    for (int i = 0; i < nx; ++i) xs[i] = d.x_lo + d.width() * abscissa(i, nx);
    for (int j = 0; j < ny; ++j) ys[j] = d.y_lo + d.height() * abscissa(j, ny);
    xs.front() = d.x_lo;
    xs.back() = d.x_hi;  // endpoints exactly on the boundary
    ys.front() = d.y_lo;
    ys.back() = d.y_hi;

    std::vector<Node> nodes;
    nodes.reserve(static_cast<size_t>(nx) * ny);
    int idx = 0;
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            const bool bnd = i == 0 || i == nx - 1 || j == 0 || j == ny - 1;
            nodes.push_back({xs[i], ys[j], idx++, bnd ? NodeKind::Boundary : NodeKind::Interior});
        }
    return NodeSet(std::move(nodes), d, dist);
}

}  // namespace

NodeSet generate_uniform(int nx, int ny, const Rect& domain) {
    return tensor_grid(nx, ny, domain, Distribution::Uniform, [](int i, int n) {
        return static_cast<double>(i) / static_cast<double>(n - 1);
    });
}

NodeSet generate_chebyshev(int nx, int ny, const Rect& domain) {
    return tensor_grid(nx, ny, domain, Distribution::Chebyshev, [](int i, int n) {
        return 0.5 * (1.0 - std::cos(static_cast<double>(i) * M_PI / static_cast<double>(n - 1)));
    });
}

namespace {

// Half-open sectors [0,90), [90,180), [180,270), [270,360) via sign tests,
// so axis-aligned neighbors classify deterministically.
int quadrant_of(double dx, double dy) {
    if (dx > 0.0 && dy >= 0.0) return 0;
    if (dx <= 0.0 && dy > 0.0) return 1;
    if (dx < 0.0 && dy <= 0.0) return 2;
    return 3;
}

// smallest singular value of the (N-1)x2 offset matrix, via the 2x2 Gram matrix
double offsets_min_singular_value(const std::vector<std::array<double, 2>>& offs) {
    double a = 0, b = 0, c = 0;
    for (const auto& o : offs) {
        a += o[0] * o[0];
        b += o[0] * o[1];
        c += o[1] * o[1];
    }
    const double tr = a + c;
    const double disc = std::sqrt((a - c) * (a - c) + 4.0 * b * b);
    const double lmin = 0.5 * (tr - disc);
    return std::sqrt(std::max(lmin, 0.0));
}

}  // namespace

Star select_star(const NodeSet& node_set, int center, int star_size) {
    if (center < 0 || center >= node_set.size())
        throw std::invalid_argument("select_star: center out of range");
    if (node_set[center].kind != NodeKind::Interior)
        throw std::invalid_argument("select_star: center must be an interior node");
    if (star_size != 5 && star_size != 9)
        throw std::invalid_argument("select_star: star size must be 5 or 9");

    const int per_quadrant = star_size == 5 ? 1 : 2;
    const Node& c = node_set[center];

    // (distance^2, index) candidates per sector; ties break on index
    std::array<std::vector<std::pair<double, int>>, 4> cand;
    for (const Node& n : node_set.nodes()) {
        if (n.index == center) continue;
        const double dx = n.x - c.x, dy = n.y - c.y;
        cand[quadrant_of(dx, dy)].emplace_back(dx * dx + dy * dy, n.index);
    }

    Star star;
    star.center = center;
    for (int q = 0; q < 4; ++q) {
        if (static_cast<int>(cand[q].size()) < per_quadrant)
            throw StencilError("select_star: empty quadrant " + std::to_string(q) +
                                   " around node " + std::to_string(center),
                               center, q);
        std::sort(cand[q].begin(), cand[q].end());
        for (int k = 0; k < per_quadrant; ++k) {
            const int j = cand[q][k].second;
            star.neighbors.push_back(j);
            star.offsets.push_back({node_set[j].x - c.x, node_set[j].y - c.y});
        }
    }

    if (offsets_min_singular_value(star.offsets) <= 1e-10)
        throw StencilError("select_star: degenerate offsets at node " + std::to_string(center),
                           center);
    return star;
}

double nodal_spacing(const NodeSet& node_set) {
    const int n = node_set.size();
    if (n < 2) throw std::invalid_argument("nodal_spacing: need at least two nodes");
    double h = 0.0;
    for (int i = 0; i < n; ++i) {
        double best = std::numeric_limits<double>::infinity();
        for (int j = 0; j < n; ++j) {
            if (j == i) continue;
            const double dx = node_set[i].x - node_set[j].x;
            const double dy = node_set[i].y - node_set[j].y;
            best = std::min(best, dx * dx + dy * dy);
        }
        h = std::max(h, best);
    }
    return std::sqrt(h);
}

void write_nodes_csv(const NodeSet& node_set, std::ostream& out) {
    const Rect& d = node_set.domain();
    char buf[160];
    std::snprintf(buf, sizeof buf, "# domain %.17g %.17g %.17g %.17g %s\n", d.x_lo, d.x_hi, d.y_lo,
                  d.y_hi,
                  node_set.distribution() == Distribution::Uniform ? "uniform" : "chebyshev");
    out << buf << "index,x,y,kind\n";
    for (const Node& n : node_set.nodes()) {
        std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%s\n", n.index, n.x, n.y,
                      n.kind == NodeKind::Boundary ? "boundary" : "interior");
        out << buf;
    }
}

NodeSet read_nodes_csv(std::istream& in) {
    std::string line;
    Rect d;
    Distribution dist = Distribution::Uniform;
    bool have_domain = false;
    std::vector<Node> nodes;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::istringstream ls(line.substr(1));
            std::string tag, dn;
            if (ls >> tag >> d.x_lo >> d.x_hi >> d.y_lo >> d.y_hi >> dn && tag == "domain") {
                dist = dn == "chebyshev" ? Distribution::Chebyshev : Distribution::Uniform;
                have_domain = true;
            }
            continue;
        }
        if (line.rfind("index,", 0) == 0) continue;  // header
        Node n;
        char kind[32] = {0};
        if (std::sscanf(line.c_str(), "%d,%lg,%lg,%31s", &n.index, &n.x, &n.y, kind) != 4)
            throw std::invalid_argument("read_nodes_csv: malformed row: " + line);
        n.kind = std::string(kind) == "boundary" ? NodeKind::Boundary : NodeKind::Interior;
        nodes.push_back(n);
    }
    if (nodes.empty()) throw std::invalid_argument("read_nodes_csv: no rows");
    if (!have_domain) {
        // infer the bounding box
        d.x_lo = d.x_hi = nodes[0].x;
        d.y_lo = d.y_hi = nodes[0].y;
        for (const Node& n : nodes) {
            d.x_lo = std::min(d.x_lo, n.x);
            d.x_hi = std::max(d.x_hi, n.x);
            d.y_lo = std::min(d.y_lo, n.y);
            d.y_hi = std::max(d.y_hi, n.y);
        }
    }
    return NodeSet(std::move(nodes), d, dist);
}

void write_nodes_csv_file(const NodeSet& node_set, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::invalid_argument("cannot open " + path + " for writing");
    write_nodes_csv(node_set, f);
}

NodeSet read_nodes_csv_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::invalid_argument("cannot open " + path);
    return read_nodes_csv(f);
}

}  // namespace meshfree
