#pragma once

#include <Eigen/Dense>

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

namespace ailfem {

using Vec2 = Eigen::Vector2d;

// Triangle of a conforming 2D mesh. Local edge e is the edge opposite local
// vertex e, i.e. it connects vertices (e+1)%3 and (e+2)%3. The refinement
// edge is the edge opposite the newest vertex.
struct Triangle {
    std::array<int, 3> v;
    int ref_edge = 0;  // local index of the refinement edge
    int level = 0;     // bisections since the initial mesh
    int parent = -1;   // triangle index in the mesh this one was refined from
};

// Endpoints of the edge a vertex was created on; (-1,-1) for initial vertices.
struct VertexOrigin {
    int a = -1;
    int b = -1;
};

// Conforming triangulation with newest-vertex-bisection bookkeeping.
// Immutable after construction; refinement produces a new mesh.
struct Mesh {
    std::vector<Vec2> vertices;
    std::vector<Triangle> triangles;
    std::vector<std::array<int, 2>> boundary_edges;  // homogeneous Dirichlet
    std::vector<VertexOrigin> vertex_origins;

    int num_vertices() const { return static_cast<int>(vertices.size()); }
    int num_triangles() const { return static_cast<int>(triangles.size()); }

    std::array<int, 2> edge(int t, int e) const {
        const auto& tri = triangles[t].v;
        return {tri[(e + 1) % 3], tri[(e + 2) % 3]};
    }
    double signed_area(int t) const {
        const auto& tri = triangles[t].v;
        const Vec2 d1 = vertices[tri[1]] - vertices[tri[0]];
        const Vec2 d2 = vertices[tri[2]] - vertices[tri[0]];
        return 0.5 * (d1.x() * d2.y() - d1.y() * d2.x());
    }
    double area(int t) const { return signed_area(t); }
    double total_area() const;
    double edge_length(int t, int e) const {
        const auto ev = edge(t, e);
        return (vertices[ev[0]] - vertices[ev[1]]).norm();
    }
    double diameter(int t) const;
};

// Triangle indices selected for refinement; sorted and duplicate-free.
struct MarkedSet {
    std::vector<int> indices;

    static MarkedSet of(std::vector<int> idx, const Mesh& mesh);
    bool empty() const { return indices.empty(); }
    std::size_t size() const { return indices.size(); }
};

// Initial meshes of the built-in domains: "square", "lshape", "zshape".
// Coarse triangulations use axis-aligned right isoceles triangles; the
// refinement edge of each initial triangle is its longest edge, ties broken
// by the smallest global index of the opposite vertex.
Mesh make_domain(const std::string& name);

// Coarsest conforming bisection refinement in which the refinement edge of
// every marked triangle is bisected. Closure marks further refinement edges
// until every triangle is cut only along marked edges.
Mesh refine(const Mesh& mesh, const MarkedSet& marked);

// refine() with every triangle marked.
Mesh uniform_refine(const Mesh& mesh);

// max over triangles of diameter^2 / area
double shape_regularity(const Mesh& mesh);

// Neighbor triangle across each local edge, -1 on the boundary.
std::vector<std::array<int, 3>> triangle_neighbors(const Mesh& mesh);

// True for vertices lying on a boundary edge.
std::vector<char> boundary_vertex_mask(const Mesh& mesh);

// Full conformity audit: positive areas, matching interior edges, boundary
// edge set equal to the 1-incident edge set. Throws std::runtime_error with
// a description of the first violation.
void check_mesh(const Mesh& mesh);

// Line-oriented text format:
//   vertices N         followed by N lines "x y"
//   triangles M        followed by M lines "i j k r"
//   boundary B         followed by B lines "i j"
// Indices 0-based, coordinates and nothing else full-precision decimal.
void write_mesh(std::ostream& out, const Mesh& mesh);
Mesh read_mesh(std::istream& in);
std::string to_text(const Mesh& mesh);
Mesh mesh_from_text(const std::string& text);

}  // namespace ailfem
