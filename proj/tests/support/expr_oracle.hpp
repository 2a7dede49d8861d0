#pragma once

// Reference reader for emitted vertex-program snippets. It shares no code
// with the engine: text in, numbers out.

#include <memory>
#include <string>

namespace oracle {

struct Node;

class Snippet {
 public:
  // Accepts `p.<swizzle> = p.<swizzle> + (<expr>);` or a bare expression.
  static Snippet parse(const std::string& text);

  // Value of the right-hand expression at (x, y, z, t).
  double value(double x, double y, double z, double t) const;

  // Coordinates after applying the statement.
  void apply(double& x, double& y, double& z, double t) const;

  const std::string& swizzle() const { return swizzle_; }

 private:
  std::shared_ptr<const Node> root_;
  std::string swizzle_;
};

}  // namespace oracle
