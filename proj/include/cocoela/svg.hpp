#ifndef COCOELA_SVG_HPP
#define COCOELA_SVG_HPP

#include <string>

#include "cocoela/analysis.hpp"

namespace cocoela::svg {

/// Scatter plot: generated problems black, COCO problems red. One
/// <circle> per embedded problem.
std::string plot_embedding(const analysis::Embedding2D& e, const std::string& title = "");

/// COCO nodes on the left arc, generated nodes on the right arc. Edge
/// width scales with |r|; positive edges blue, negative red.
std::string plot_graph(const analysis::CorrelationGraph& g, const std::string& title = "");

}  // namespace cocoela::svg

#endif
