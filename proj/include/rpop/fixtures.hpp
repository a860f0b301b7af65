#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rpop/care.hpp"

namespace rpop {

/// One benchmark instance: coefficient matrices, the optional published
/// upper bound and reference solutions, and the expected verdict.
struct ExampleFixture {
  std::string name;  // "example1" .. "example5"
  CareProblem care;
  std::optional<LqrProblem> lqr;  // when the instance is stated as an LQR
  std::optional<UpperBound> bound;
  std::vector<Eigen::MatrixXd> reference_solutions;  // printed P* matrices
  CareVerdict expected;
};

/// The five benchmark instances, embedded so the suite runs from a clean
/// checkout.
const std::vector<ExampleFixture>& paper_examples();

const ExampleFixture& paper_example(int number);  // 1-based

}  // namespace rpop
