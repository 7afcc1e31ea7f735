#include "oracles.hpp"

#include "ranklab/errors.hpp"
#include "ranklab/field_io.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <filesystem>

using namespace ranklab;

TEST(FieldIo, PolynomialTextExample) {
  const Polynomial p = parse_polynomial("# x1^2/2\n2 0 0  0.5\n0 0 1 -1.25\n");
  EXPECT_EQ(p.dim(), 3);
  EXPECT_EQ(p.degree(), 2);
  EXPECT_EQ(p.coefficient({2, 0, 0}), 0.5);
  EXPECT_EQ(p.coefficient({0, 0, 1}), -1.25);
  EXPECT_EQ(p.coefficient({1, 1, 0}), 0.0);
}

TEST(FieldIo, PolynomialRoundTripIsBitExact) {
  for (std::uint64_t i = 0; i < 20; ++i) {
    CounterRng rng(31, 0, i);
    const int n = 1 + static_cast<int>(i % 4);
    Polynomial p = oracle::random_polynomial(n, 1 + static_cast<int>(i % 6), rng, 1e3);
    if (i % 3 == 0) p = p.recentered(random_vector(n, rng, -1, 1));
    const std::string text = format_polynomial(p);
    const Polynomial q = parse_polynomial(text);
    EXPECT_EQ(q, p);
    EXPECT_EQ(format_polynomial(q), text);
    for (std::size_t k = 0; k < p.coefficients().size(); ++k)
      EXPECT_EQ(std::memcmp(&p.coefficients()[k], &q.coefficients()[k], sizeof(double)), 0);
  }
}

TEST(FieldIo, PolynomialRejectsMalformedInput) {
  EXPECT_THROW(parse_polynomial(""), InputError);
  EXPECT_THROW(parse_polynomial("2 0 1.0\n1 0 0 2.0\n"), InputError);
  EXPECT_THROW(parse_polynomial("2 0 1.0\n2 0 3.0\n"), InputError);
  EXPECT_THROW(parse_polynomial("2 x 1.0\n"), InputError);
  EXPECT_THROW(parse_polynomial("-1 0 1.0\n"), InputError);
  EXPECT_THROW(parse_polynomial("9 0 1.0\n"), InputError);
}

TEST(FieldIo, GridRoundTripIsBitExact) {
  const BoxDomain box(Vector::Constant(2, 0.3), 0.7, 7);
  const GridField g = GridField::sample([](const Vector& x) { return std::sin(3 * x(0)) * std::exp(x(1)) / 3; }, box);
  const std::string text = format_grid(g);
  const GridField h = parse_grid(text);
  EXPECT_EQ(h, g);
  EXPECT_EQ(format_grid(h), text);
}

TEST(FieldIo, GridHeaderWithoutOrigin) {
  const GridField g = parse_grid("1 0.5 3\n1\n2\n4\n");
  EXPECT_EQ(g.dims(), std::vector<int>{3});
  EXPECT_EQ(g.origin(), Vector::Zero(1));
  EXPECT_EQ(g.values(), (std::vector<double>{1, 2, 4}));
  EXPECT_THROW(parse_grid("1 0.5 3\n1\n2\n"), InputError);
  EXPECT_THROW(parse_grid("2 0.5 3\n1\n2\n3\n"), InputError);
  EXPECT_THROW(parse_grid("1 -0.5 3\n1\n2\n3\n"), InputError);
}

TEST(FieldIo, FilesRoundTrip) {
  const auto dir = std::filesystem::temp_directory_path() / "ranklab_field_io";
  std::filesystem::create_directories(dir);
  const Polynomial p = Polynomial::quadratic(Vector::Ones(2), SymMatrix::identity(2));
  write_polynomial_file(p, (dir / "p.poly").string());
  EXPECT_EQ(read_polynomial_file((dir / "p.poly").string()), p);
  const GridField g = GridField::sample([](const Vector& x) { return x.sum(); }, BoxDomain(Vector::Zero(2), 1.0, 4));
  write_grid_file(g, (dir / "g.grid").string());
  EXPECT_EQ(read_grid_file((dir / "g.grid").string()), g);
  EXPECT_THROW(read_grid_file((dir / "missing.grid").string()), InputError);
}

TEST(FieldIo, FormatDoubleUses17Digits) {
  EXPECT_EQ(format_double(0.1), "0.10000000000000001");
  EXPECT_EQ(format_double(1.0), "1");
  EXPECT_EQ(std::stod(format_double(1.0 / 3)), 1.0 / 3);
}
