#include "rpop/fixtures.hpp"

#include <cmath>
#include <stdexcept>

namespace rpop {
namespace {

std::vector<ExampleFixture> build_examples() {
  std::vector<ExampleFixture> out;

  {
    ExampleFixture ex;
    ex.name = "example1";
    Eigen::MatrixXd A(3, 3), B(3, 1), C(1, 3), W(1, 1);
    A << 1.8, 0.6, -0.2,
         0.8, 1.6, -0.2,
        -0.4, -0.8, 2.6;
    B << 1, 1, 0;
    C << 1, 1, 2;
    W << 1;
    ex.lqr = LqrProblem{A, B, C, W};
    ex.care = build_care_from_lqr(*ex.lqr);
    ex.expected = CareVerdict::Infeasible;
    out.push_back(std::move(ex));
  }

  {
    ExampleFixture ex;
    ex.name = "example2";
    Eigen::MatrixXd A(3, 3), R(3, 3), Q(3, 3);
    A << 1.8, 0.6, -0.2,
         0.8, 1.6, -0.2,
        -0.4, -0.8, 2.6;
    R << 1, 1, 0,
         1, 1, 0,
         0, 0, 0;
    Q << -7.6725, 6.0546, -3.8884,
          6.0546, -9.6761, 4.2537,
         -3.8884, 4.2537, -1.9167;
    ex.care = make_care(A, R, Q);
    Eigen::MatrixXd P1(3, 3), P2(3, 3);
    P1 << 4.0478, -2.9288, 1.2014,
         -2.9288, 3.9168, -1.0209,
          1.2014, -1.0209, 0.3888;
    P2 << 4.0886, -2.8741, 1.2161,
         -2.8741, 3.9904, -1.0012,
          1.2161, -1.0012, 0.3940;
    ex.reference_solutions = {P1, P2};
    ex.expected = CareVerdict::Solved;
    out.push_back(std::move(ex));
  }

  {
    ExampleFixture ex;
    ex.name = "example3";
    Eigen::MatrixXd A(4, 4), R(4, 4), Q(4, 4);
    A << -1, 0, 0, 0,
         -2, 1, 0, 0,
          0, 5, 5, 0,
          3, -3, 3, 6;
    R << 4, -3, 0, 2,
        -3, 7, 1, 2,
         0, 1, 8, -6,
         2, 2, -6, 5;
    Q << -3, -8, 10, 15,
         -8, -32, 4, -1,
         10, 4, 20, 23,
         15, -1, 23, 31;
    ex.care = make_care(A, R, Q);
    ex.expected = CareVerdict::Infeasible;
    out.push_back(std::move(ex));
  }

  {
    ExampleFixture ex;
    ex.name = "example4";
    Eigen::MatrixXd A(3, 3), B(3, 3), C(3, 3), W(3, 3);
    A << -1, 0, 2,
          0, -1, 0,
          0, 0, -3;
    B << 1, 0, 1,
         0, 1, 0,
         1, 0, -1;
    C << 1, 0, 0,
         0, std::sqrt(2.0), 0,
         0, 0, 1;
    W = Eigen::MatrixXd::Identity(3, 3);
    ex.lqr = LqrProblem{A, B, C, W};
    ex.care = build_care_from_lqr(*ex.lqr);
    Eigen::MatrixXd Pu(3, 3), Ps(3, 3);
    Pu << 0.4730, 0, 0,
          0, 0.9459, 0,
          0, 0, 0.4730;
    Ps << 0.3551, 0.0000, 0.1372,
          0.0000, 0.7321, 0.0000,
          0.1372, 0.0000, 0.2336;
    ex.bound = UpperBound{Pu, "Liu 2020, Theorem 2.1"};
    ex.reference_solutions = {Ps};
    ex.expected = CareVerdict::Solved;
    out.push_back(std::move(ex));
  }

  {
    ExampleFixture ex;
    ex.name = "example5";
    Eigen::MatrixXd A(3, 3), R(3, 3), Q(3, 3);
    A << -3, 0, 1,
          1, 2, 2,
          0, 0, -3;
    R << 1, 3, 0,
         3, 10, 1,
         0, 1, 1;
    Q << 5, 0, 1,
         0, 6, 0,
         1, 0, 11;
    ex.care = make_care(A, R, Q);
    Eigen::MatrixXd Pu(3, 3), Ps(3, 3);
    Pu << 1.1125, -0.1244, 0.1635,
         -0.1244, 1.3426, -0.0476,
          0.1635, -0.0476, 1.6322;
    Ps << 0.7655, -0.1338, 0.2163,
         -0.1338, 1.0528, -0.0220,
          0.2163, -0.0220, 1.5153;
    ex.bound = UpperBound{Pu, "Zhang 2013, Corollary 3"};
    ex.reference_solutions = {Ps};
    ex.expected = CareVerdict::Solved;
    out.push_back(std::move(ex));
  }

  return out;
}

}  // namespace

const std::vector<ExampleFixture>& paper_examples() {
  static const std::vector<ExampleFixture> examples = build_examples();
  return examples;
}

const ExampleFixture& paper_example(int number) {
  const auto& all = paper_examples();
  if (number < 1 || number > static_cast<int>(all.size())) {
    throw std::out_of_range("paper_example: number must be 1..5");
  }
  return all[number - 1];
}

}  // namespace rpop
