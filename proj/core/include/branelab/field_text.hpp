#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "branelab/form.hpp"
#include "branelab/scalar_field.hpp"
#include "branelab/vector_field.hpp"

namespace branelab {

/// Named values visible to the expression grammar. Entries defined on a
/// leading-prefix chart are pulled back automatically.
struct Symbols {
  std::map<std::string, DifferentialForm> forms;  // functions are 0-forms
  std::map<std::string, VectorField> vectors;
};

struct ParsedValue {
  DifferentialForm form;
  std::optional<VectorField> vector;
  bool is_vector() const noexcept { return vector.has_value(); }
};

/// Parses sums such as `1.5*x1^2*cos(2*pi*(q - x2))`, `x1*dx1^dy2 - dq`
/// or `d/dq - 0.4*d/dx1`. `*` between forms is the wedge product; `^`
/// is a power when its right operand is an integer literal and a wedge
/// otherwise. Circle coordinates may only occur inside cos/sin, whose
/// argument must be 2*pi times an integer combination of circle
/// coordinates plus a constant phase. Errors are ParseError with line and
/// column (line/column_offset locate the text inside a larger file).
ParsedValue parse_expression(const ModelPtr& model, std::string_view text,
                             const Symbols* symbols = nullptr, int line = 1, int column_offset = 0);

ScalarField parse_field(const ModelPtr& model, std::string_view text, const Symbols* symbols = nullptr,
                        int line = 1, int column_offset = 0);
/// expected_degree < 0 accepts any degree.
DifferentialForm parse_form(const ModelPtr& model, std::string_view text, int expected_degree = -1,
                            const Symbols* symbols = nullptr, int line = 1, int column_offset = 0);
VectorField parse_vector(const ModelPtr& model, std::string_view text, const Symbols* symbols = nullptr,
                         int line = 1, int column_offset = 0);

}  // namespace branelab
