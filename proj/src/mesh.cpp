#include "ailfem/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace ailfem {

namespace {

std::uint64_t edge_key(int a, int b) {
    if (a > b) std::swap(a, b);
    return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b);
}

using EdgeMap = std::unordered_map<std::uint64_t, int>;

// Enumerate undirected edges; returns edge ids per (triangle, local edge).
EdgeMap build_edge_map(const Mesh& mesh) {
    EdgeMap map;
    map.reserve(mesh.triangles.size() * 2);
    int next = 0;
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        for (int e = 0; e < 3; ++e) {
            const auto ev = mesh.edge(t, e);
            const auto key = edge_key(ev[0], ev[1]);
            if (map.find(key) == map.end()) map.emplace(key, next++);
        }
    }
    return map;
}

}  // namespace

double Mesh::total_area() const {
    double sum = 0.0;
    for (int t = 0; t < num_triangles(); ++t) sum += signed_area(t);
    return sum;
}

double Mesh::diameter(int t) const {
    double d = 0.0;
    for (int e = 0; e < 3; ++e) d = std::max(d, edge_length(t, e));
    return d;
}

MarkedSet MarkedSet::of(std::vector<int> idx, const Mesh& mesh) {
    std::sort(idx.begin(), idx.end());
    idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
    if (!idx.empty() && (idx.front() < 0 || idx.back() >= mesh.num_triangles()))
        throw std::invalid_argument("MarkedSet: triangle index out of range");
    return MarkedSet{std::move(idx)};
}

Mesh make_domain(const std::string& name) {
    Mesh mesh;
    auto add_tri = [&mesh](int a, int b, int c) {
        mesh.triangles.push_back(Triangle{{a, b, c}, 0, 0, -1});
    };
    if (name == "square") {
        mesh.vertices = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
        add_tri(0, 1, 2);
        add_tri(0, 2, 3);
    } else if (name == "lshape") {
        // (-1,1)^2 minus [0,1]x[-1,0]; two triangles per remaining unit square
        mesh.vertices = {{-1, -1}, {0, -1}, {0, 0}, {1, 0},
                         {1, 1},   {0, 1},  {-1, 1}, {-1, 0}};
        add_tri(0, 1, 2);
        add_tri(0, 2, 7);
        add_tri(7, 2, 5);
        add_tri(7, 5, 6);
        add_tri(2, 3, 4);
        add_tri(2, 4, 5);
    } else if (name == "zshape") {
        // (-1,1)^2 minus conv{(-1,0),(0,0),(-1,-1)}; fan around the origin
        mesh.vertices = {{0, 0},  {1, 0},  {1, 1},   {0, 1},  {-1, 1},
                         {-1, 0}, {-1, -1}, {0, -1}, {1, -1}};
        add_tri(0, 1, 2);
        add_tri(0, 2, 3);
        add_tri(0, 3, 4);
        add_tri(0, 4, 5);
        add_tri(0, 6, 7);
        add_tri(0, 7, 8);
        add_tri(0, 8, 1);
    } else {
        throw std::invalid_argument("make_domain: unknown domain '" + name + "'");
    }
    mesh.vertex_origins.assign(mesh.vertices.size(), VertexOrigin{});

    // refinement edge: longest edge, ties by smallest opposite-vertex index
    for (auto& tri : mesh.triangles) {
        int best = 0;
        double best_len = -1.0;
        for (int e = 0; e < 3; ++e) {
            const Vec2 d = mesh.vertices[tri.v[(e + 1) % 3]] -
                           mesh.vertices[tri.v[(e + 2) % 3]];
            const double len = d.norm();
            if (len > best_len ||
                (len == best_len && tri.v[e] < tri.v[best])) {
                best = e;
                best_len = len;
            }
        }
        tri.ref_edge = best;
    }

    // boundary edges = edges incident to exactly one triangle
    std::unordered_map<std::uint64_t, int> incidence;
    for (int t = 0; t < mesh.num_triangles(); ++t)
        for (int e = 0; e < 3; ++e) {
            const auto ev = mesh.edge(t, e);
            incidence[edge_key(ev[0], ev[1])]++;
        }
    for (int t = 0; t < mesh.num_triangles(); ++t)
        for (int e = 0; e < 3; ++e) {
            const auto ev = mesh.edge(t, e);
            if (incidence[edge_key(ev[0], ev[1])] == 1)
                mesh.boundary_edges.push_back({std::min(ev[0], ev[1]),
                                               std::max(ev[0], ev[1])});
        }
    std::sort(mesh.boundary_edges.begin(), mesh.boundary_edges.end());
    check_mesh(mesh);
    return mesh;
}

namespace {

// Bisect tri at its refinement edge. midpoint() yields the midpoint vertex of
// an original edge or -1; recursion stops once a child's refinement edge has
// no midpoint (children of children always stop: their refinement edges are
// newly created edges).
template <class MidpointFn>
void emit_bisected(const Triangle& tri, const MidpointFn& midpoint,
                   std::vector<Triangle>& out) {
    const int r = tri.ref_edge;
    const int p = tri.v[r];
    const int a = tri.v[(r + 1) % 3];
    const int b = tri.v[(r + 2) % 3];
    const int m = midpoint(a, b);
    if (m < 0) {
        out.push_back(tri);
        return;
    }
    // children keep the parent vertex order sense; new vertex m is the newest
    // vertex of both, so the refinement edges are the old edges (p,a), (b,p)
    Triangle c1{{p, a, m}, 2, tri.level + 1, tri.parent};
    Triangle c2{{p, m, b}, 1, tri.level + 1, tri.parent};
    emit_bisected(c1, midpoint, out);
    emit_bisected(c2, midpoint, out);
}

}  // namespace

Mesh refine(const Mesh& mesh, const MarkedSet& marked) {
    if (!marked.indices.empty() &&
        (marked.indices.front() < 0 ||
         marked.indices.back() >= mesh.num_triangles()))
        throw std::invalid_argument("refine: marked set out of range");

    const EdgeMap edges = build_edge_map(mesh);
    std::vector<char> edge_marked(edges.size(), 0);
    auto edge_id = [&edges](int a, int b) -> int {
        const auto it = edges.find(edge_key(a, b));
        return it == edges.end() ? -1 : it->second;
    };

    for (const int t : marked.indices) {
        const auto ev = mesh.edge(t, mesh.triangles[t].ref_edge);
        edge_marked[edge_id(ev[0], ev[1])] = 1;
    }

    // closure: a triangle with any marked edge gets its refinement edge marked
    bool changed = !marked.indices.empty();
    while (changed) {
        changed = false;
        for (int t = 0; t < mesh.num_triangles(); ++t) {
            const auto rv = mesh.edge(t, mesh.triangles[t].ref_edge);
            const int rid = edge_id(rv[0], rv[1]);
            if (edge_marked[rid]) continue;
            for (int e = 0; e < 3; ++e) {
                const auto ev = mesh.edge(t, e);
                if (edge_marked[edge_id(ev[0], ev[1])]) {
                    edge_marked[rid] = 1;
                    changed = true;
                    break;
                }
            }
        }
    }

    Mesh out;
    out.vertices = mesh.vertices;
    out.vertex_origins = mesh.vertex_origins;

    // create midpoints in triangle-scan order so vertex numbering is
    // independent of hash-map iteration order
    std::unordered_map<std::uint64_t, int> midpoints;
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        for (int e = 0; e < 3; ++e) {
            const auto ev = mesh.edge(t, e);
            const auto key = edge_key(ev[0], ev[1]);
            if (!edge_marked[edges.at(key)] || midpoints.count(key)) continue;
            midpoints.emplace(key, out.num_vertices());
            out.vertices.push_back(
                0.5 * (mesh.vertices[ev[0]] + mesh.vertices[ev[1]]));
            out.vertex_origins.push_back(
                VertexOrigin{std::min(ev[0], ev[1]), std::max(ev[0], ev[1])});
        }
    }
    auto midpoint = [&midpoints](int a, int b) -> int {
        const auto it = midpoints.find(edge_key(a, b));
        return it == midpoints.end() ? -1 : it->second;
    };

    out.triangles.reserve(mesh.triangles.size() * 2);
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        Triangle tri = mesh.triangles[t];
        tri.parent = t;
        emit_bisected(tri, midpoint, out.triangles);
    }

    out.boundary_edges.reserve(mesh.boundary_edges.size());
    for (const auto& be : mesh.boundary_edges) {
        const int m = midpoint(be[0], be[1]);
        if (m < 0) {
            out.boundary_edges.push_back(be);
        } else {
            out.boundary_edges.push_back({std::min(be[0], m), std::max(be[0], m)});
            out.boundary_edges.push_back({std::min(be[1], m), std::max(be[1], m)});
        }
    }
    std::sort(out.boundary_edges.begin(), out.boundary_edges.end());
    return out;
}

Mesh uniform_refine(const Mesh& mesh) {
    std::vector<int> all(mesh.num_triangles());
    for (int t = 0; t < mesh.num_triangles(); ++t) all[t] = t;
    return refine(mesh, MarkedSet{std::move(all)});
}

double shape_regularity(const Mesh& mesh) {
    double worst = 0.0;
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        const double d = mesh.diameter(t);
        worst = std::max(worst, d * d / mesh.area(t));
    }
    return worst;
}

std::vector<std::array<int, 3>> triangle_neighbors(const Mesh& mesh) {
    std::vector<std::array<int, 3>> nbr(mesh.num_triangles(), {-1, -1, -1});
    std::unordered_map<std::uint64_t, std::pair<int, int>> seen;  // edge -> (t,e)
    seen.reserve(mesh.triangles.size() * 2);
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        for (int e = 0; e < 3; ++e) {
            const auto ev = mesh.edge(t, e);
            const auto key = edge_key(ev[0], ev[1]);
            const auto it = seen.find(key);
            if (it == seen.end()) {
                seen.emplace(key, std::make_pair(t, e));
            } else {
                nbr[t][e] = it->second.first;
                nbr[it->second.first][it->second.second] = t;
            }
        }
    }
    return nbr;
}

std::vector<char> boundary_vertex_mask(const Mesh& mesh) {
    std::vector<char> mask(mesh.num_vertices(), 0);
    for (const auto& be : mesh.boundary_edges) {
        mask[be[0]] = 1;
        mask[be[1]] = 1;
    }
    return mask;
}

void check_mesh(const Mesh& mesh) {
    if (mesh.vertex_origins.size() != mesh.vertices.size())
        throw std::runtime_error("mesh: vertex origin table size mismatch");
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        const auto& tri = mesh.triangles[t];
        for (const int v : tri.v)
            if (v < 0 || v >= mesh.num_vertices())
                throw std::runtime_error("mesh: vertex index out of range");
        if (tri.ref_edge < 0 || tri.ref_edge > 2)
            throw std::runtime_error("mesh: invalid refinement edge index");
        if (!(mesh.signed_area(t) > 0.0))
            throw std::runtime_error("mesh: non-positive triangle area");
    }
    std::unordered_map<std::uint64_t, int> incidence;
    for (int t = 0; t < mesh.num_triangles(); ++t)
        for (int e = 0; e < 3; ++e) {
            const auto ev = mesh.edge(t, e);
            if (ev[0] == ev[1])
                throw std::runtime_error("mesh: degenerate edge");
            incidence[edge_key(ev[0], ev[1])]++;
        }
    std::vector<std::array<int, 2>> one_sided;
    for (const auto& [key, count] : incidence) {
        if (count > 2)
            throw std::runtime_error("mesh: edge shared by more than two triangles");
        if (count == 1)
            one_sided.push_back({static_cast<int>(key >> 32),
                                 static_cast<int>(key & 0xffffffffu)});
    }
    std::sort(one_sided.begin(), one_sided.end());
    auto sorted_boundary = mesh.boundary_edges;
    std::sort(sorted_boundary.begin(), sorted_boundary.end());
    if (one_sided != sorted_boundary)
        throw std::runtime_error(
            "mesh: boundary edge set does not match 1-incident edges");
}

void write_mesh(std::ostream& out, const Mesh& mesh) {
    out << std::setprecision(17);
    out << "vertices " << mesh.num_vertices() << "\n";
    for (const auto& v : mesh.vertices) out << v.x() << " " << v.y() << "\n";
    out << "triangles " << mesh.num_triangles() << "\n";
    for (const auto& t : mesh.triangles)
        out << t.v[0] << " " << t.v[1] << " " << t.v[2] << " " << t.ref_edge
            << "\n";
    out << "boundary " << mesh.boundary_edges.size() << "\n";
    for (const auto& be : mesh.boundary_edges)
        out << be[0] << " " << be[1] << "\n";
}

Mesh read_mesh(std::istream& in) {
    auto expect = [&in](const char* keyword) -> int {
        std::string word;
        int n = -1;
        if (!(in >> word >> n) || word != keyword || n < 0)
            throw std::runtime_error(std::string("mesh read: expected '") +
                                     keyword + " <count>'");
        return n;
    };
    Mesh mesh;
    const int nv = expect("vertices");
    mesh.vertices.resize(nv);
    for (auto& v : mesh.vertices)
        if (!(in >> v.x() >> v.y()))
            throw std::runtime_error("mesh read: bad vertex line");
    const int nt = expect("triangles");
    mesh.triangles.resize(nt);
    for (auto& t : mesh.triangles)
        if (!(in >> t.v[0] >> t.v[1] >> t.v[2] >> t.ref_edge))
            throw std::runtime_error("mesh read: bad triangle line");
    const int nb = expect("boundary");
    mesh.boundary_edges.resize(nb);
    for (auto& be : mesh.boundary_edges)
        if (!(in >> be[0] >> be[1]))
            throw std::runtime_error("mesh read: bad boundary line");
    mesh.vertex_origins.assign(mesh.vertices.size(), VertexOrigin{});
    check_mesh(mesh);
    return mesh;
}

std::string to_text(const Mesh& mesh) {
    std::ostringstream os;
    write_mesh(os, mesh);
    return os.str();
}

Mesh mesh_from_text(const std::string& text) {
    std::istringstream is(text);
    return read_mesh(is);
}

}  // namespace ailfem
