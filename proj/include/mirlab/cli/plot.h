#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace mirlab::cli {

// A CSV input does not have the columns its plot kind needs.
class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // Index of the column; throws SchemaError naming it when absent.
  std::size_t column(std::string_view name) const;
  bool has(std::string_view name) const;
};

// Comma-separated, first line is the header, no quoting.
CsvTable parse_csv(std::string_view text);

enum class PlotKind { kReachability, kLoss, kSuccess };

PlotKind parse_plot_kind(std::string_view name);

struct PlotInput {
  std::string label;  // legend entry (usually the file stem)
  CsvTable table;
};

// Deterministic SVG on a fixed 640x400 canvas:
//   reachability  frame,normalized_distance       one polyline per input
//   loss          step,loss[,holdout_loss,...]    one polyline per numeric column per input
//   success       method,domain,lift_rate,stack_rate
//                 grouped bars, one group per domain, one bar per method
//                 (lift rate, with the stack rate drawn inside it)
std::string plot_svg(PlotKind kind, const std::vector<PlotInput>& inputs, const std::string& title);

}  // namespace mirlab::cli
