#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <string_view>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

namespace engrank {

// A trained model mapping a (masked) feature row to a real score. Higher is
// better. Implementations are immutable once trained.
class Scorer {
 public:
  virtual ~Scorer() = default;

  virtual std::string_view kind() const = 0;
  virtual std::size_t num_features() const = 0;
  virtual double score_row(std::span<const double> x) const = 0;
  // Versioned JSON; see model_io in models.hpp for the envelope.
  virtual nlohmann::json to_json() const = 0;

  // Throws Error{SchemaMismatch} if x.size() != num_features().
  double score(std::span<const double> x) const;
  Eigen::VectorXd score_matrix(const Eigen::MatrixXd& rows) const;
};

// Alias matching the regression vocabulary.
inline double predict(const Scorer& model, std::span<const double> v) { return model.score(v); }

}  // namespace engrank
