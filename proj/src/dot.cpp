#include "tsvc/dot.hpp"

#include <cstdio>
#include <sstream>

#include "tsvc/errors.hpp"

namespace tsvc {

namespace {

std::string fmt(const char* format, double value) {
    char buf[64];
    std::snprintf(buf, sizeof buf, format, value);
    return buf;
}

// Split points with enough digits to be unambiguous, without trailing noise.
std::string point_label(double c) { return fmt("%.6g", c); }

}  // namespace

std::string tree_to_dot(const TsvcModel& model, int predictor) {
    const auto it = model.trees.find(predictor);
    if (it == model.trees.end())
        throw invalid_args_error("predictor " + std::to_string(predictor) +
                                 " has no coefficient tree");
    const CoefficientTree& tree = it->second;
    const auto& names = model.predictor_names;

    std::ostringstream out;
    out << "digraph \"" << names[static_cast<std::size_t>(predictor)] << "\" {\n";
    out << "  node [shape=box, fontname=\"Helvetica\"];\n";
    out << "  edge [fontname=\"Helvetica\"];\n";
    const auto& nodes = tree.nodes();
    for (std::size_t id = 0; id < nodes.size(); ++id) {
        const TreeNode& node = nodes[id];
        if (node.modifier < 0) {
            out << "  n" << id << " [label=\"" << fmt("%.3f", node.coefficient)
                << "\"];\n";
        } else {
            const std::string& mod = names[static_cast<std::size_t>(node.modifier)];
            out << "  n" << id << " [label=\"" << mod << "\"];\n";
            out << "  n" << id << " -> n" << node.left << " [label=\"" << mod
                << " <= " << point_label(node.split_point) << "\"];\n";
            out << "  n" << id << " -> n" << node.right << " [label=\"" << mod << " > "
                << point_label(node.split_point) << "\"];\n";
        }
    }
    out << "}\n";
    return out.str();
}

}  // namespace tsvc
