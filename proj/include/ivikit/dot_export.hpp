#pragma once

// Graphviz export of informative features and their redundancy links.
// Node fill: red for a negative mean weight (pushes toward class -1), blue
// for positive, gray for zero. Edge color: magenta for negative correlation,
// cyan for positive; pen width grows with the magnitude.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "ivikit/ivi.hpp"

namespace ivikit {

namespace detail {

inline std::string dot_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    return out;
}

inline std::string fixed3(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return buf;
}

inline std::string node_color(double sign) { return sign < 0 ? "red" : (sign > 0 ? "blue" : "gray"); }

struct DotEdge {
    std::size_t m, n;
    double sign_value;  // decides the color
    double magnitude;   // label and pen width
    double width_scale;
};

inline std::string write_dot(const std::string& graph_name, const std::vector<std::size_t>& nodes, const std::vector<double>& node_sign,
                             std::vector<DotEdge> edges, const std::vector<std::string>& names) {
    std::sort(edges.begin(), edges.end(), [](const DotEdge& a, const DotEdge& b) { return a.m != b.m ? a.m < b.m : a.n < b.n; });
    std::ostringstream out;
    out << "graph " << graph_name << " {\n";
    out << "  node [shape=ellipse, style=filled, fontcolor=white];\n";
    for (auto f : nodes) {
        const std::string name = f < names.size() ? names[f] : "x" + std::to_string(f);
        out << "  n" << f << " [label=\"" << dot_escape(name) << " (" << f << ")\", fillcolor=" << node_color(node_sign[f]) << "];\n";
    }
    for (const auto& e : edges) {
        out << "  n" << e.m << " -- n" << e.n << " [color=" << (e.sign_value < 0 ? "magenta" : "cyan") << ", label=\""
            << fixed3(e.magnitude) << "\", penwidth=" << fixed3(1.0 + 3.0 * std::min(1.0, std::abs(e.magnitude) / e.width_scale)) << "];\n";
    }
    out << "}\n";
    return out.str();
}

}  // namespace detail

/// Informative features and the redundancy edges among them. Edge labels are
/// the signed weight correlation.
inline std::string export_dot(const IviResult& result, const std::vector<std::string>& names) {
    std::vector<double> sign;
    for (const auto& f : result.relevance.features) sign.push_back(f.mean);
    std::vector<bool> keep(result.graph.nodes, false);
    for (auto f : result.informative()) keep[f] = true;
    std::vector<detail::DotEdge> edges;
    for (const auto& e : result.graph.edges)
        if (keep[e.m] && keep[e.n]) edges.push_back({e.m, e.n, e.rho, e.rho, 1.0});
    return detail::write_dot("ivi", result.informative(), sign, std::move(edges), names);
}

/// Stable features and the kept edges joining them. Edge labels are the summed
/// |rho| over runs; color follows the sign of the summed signed rho.
inline std::string export_dot(const ProbabilisticIviResult& result, const std::vector<std::string>& names) {
    std::vector<detail::DotEdge> edges;
    for (const auto& e : result.kept_edges)
        edges.push_back({e.m, e.n, e.signed_sum, e.abs_sum, static_cast<double>(result.runs)});
    return detail::write_dot("ivi", result.stable_features, result.mean_weight, std::move(edges), names);
}

}  // namespace ivikit
