#include <filesystem>
#include <fstream>
#include <random>

#include <gtest/gtest.h>

#include "oracles/toeplitz_oracle.hpp"
#include "qrng/error.hpp"
#include "qrng/toeplitz.hpp"

namespace qrng {
namespace {

BitStream random_bits(std::mt19937_64& rng, std::size_t count) {
  BitStream out;
  out.reserve(count);
  while (out.size() < count) {
    const auto take = static_cast<unsigned>(std::min<std::size_t>(64, count - out.size()));
    out.append_bits(rng(), take);
  }
  return out;
}

BitStream number_bits(std::uint64_t value, std::size_t count) {
  BitStream out;
  out.append_bits(value, static_cast<unsigned>(count));
  return out;
}

TEST(Toeplitz, SmallWorkedExample) {
  const ToeplitzSeed seed(BitStream::from_string("1011"), 2, 3);
  const auto matrix = build_matrix(seed);
  EXPECT_EQ(matrix.row(0).to_string(), "101");
  EXPECT_EQ(matrix.row(1).to_string(), "110");
  EXPECT_EQ(extract_block(seed, BitStream::from_string("110")).to_string(), "10");
}

TEST(Toeplitz, ConstantAlongDiagonals) {
  std::mt19937_64 rng(1);
  const ToeplitzSeed seed(random_bits(rng, 40 + 70 - 1), 40, 70);
  const auto matrix = build_matrix(seed);
  for (std::size_t i = 1; i < 40; ++i) {
    for (std::size_t j = 1; j < 70; ++j) {
      ASSERT_EQ(matrix.at(i, j), matrix.at(i - 1, j - 1));
    }
  }
}

TEST(Toeplitz, ExhaustiveSmallGeometries) {
  for (std::size_t n = 1; n <= 8; ++n) {
    for (std::size_t m = 1; m <= n; ++m) {
      const std::size_t seed_bits = m + n - 1;
      for (std::uint64_t s = 0; s < (std::uint64_t{1} << seed_bits); s += (seed_bits > 10 ? 7 : 1)) {
        const ToeplitzSeed seed(number_bits(s, seed_bits), m, n);
        const ToeplitzExtractor ex(seed);
        for (std::uint64_t x = 0; x < (std::uint64_t{1} << n); ++x) {
          const auto input = number_bits(x, n);
          ASSERT_EQ(ex.extract_block(input), oracle::toeplitz_multiply(seed.bits(), m, n, input))
              << "m=" << m << " n=" << n << " seed=" << s << " x=" << x;
        }
      }
    }
  }
}

TEST(Toeplitz, RandomizedAgainstOracle) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng() % 700;
    const std::size_t m = 1 + rng() % n;
    const ToeplitzSeed seed(random_bits(rng, m + n - 1), m, n);
    const auto input = random_bits(rng, n);
    ASSERT_EQ(extract_block(seed, input), oracle::toeplitz_multiply(seed.bits(), m, n, input))
        << "m=" << m << " n=" << n;
  }
}

TEST(Toeplitz, LinearOverGf2) {
  std::mt19937_64 rng(3);
  const ToeplitzExtractor ex(ToeplitzSeed(random_bits(rng, 300 + 513 - 1), 300, 513));
  for (int i = 0; i < 50; ++i) {
    const auto a = random_bits(rng, 513);
    const auto b = random_bits(rng, 513);
    ASSERT_EQ(ex.extract_block(a ^ b), ex.extract_block(a) ^ ex.extract_block(b));
  }
  EXPECT_EQ(ex.extract_block(BitStream(513)).count_ones(), 0u);
}

TEST(Toeplitz, TwoUniversalCollisionRate) {
  // For fixed x != x', a random seed maps both to the same output with
  // probability 2^-m.
  std::mt19937_64 rng(4);
  const std::size_t m = 4;
  const std::size_t n = 64;
  const auto x = random_bits(rng, n);
  const auto y = random_bits(rng, n);
  const int trials = 20000;
  int collisions = 0;
  for (int t = 0; t < trials; ++t) {
    const ToeplitzSeed seed(random_bits(rng, m + n - 1), m, n);
    if (extract_block(seed, x) == extract_block(seed, y)) ++collisions;
  }
  const double expected = trials / 16.0;
  EXPECT_NEAR(collisions, expected, 5.0 * std::sqrt(expected * (1 - 1.0 / 16)));
}

TEST(Toeplitz, StreamDropsPartialBlock) {
  std::mt19937_64 rng(5);
  const std::size_t n = 4096;
  const std::size_t m = rows_for_ratio(0.6135, n);
  EXPECT_EQ(m, 2512u);
  const ToeplitzExtractor ex(ToeplitzSeed(random_bits(rng, m + n - 1), m, n));
  const auto raw = random_bits(rng, 10'000'000);
  const auto out = ex.extract_stream(raw, 0.6135);
  ASSERT_EQ(out.size(), 2441u * 2512u);
  EXPECT_EQ(out.size(), 6'131'792u);
  // Block k of the output is the hash of block k of the input.
  for (std::size_t k : {0u, 1u, 1000u, 2440u}) {
    ASSERT_EQ(out.slice(k * m, m), ex.extract_block(raw.slice(k * n, n))) << k;
  }
}

TEST(Toeplitz, StreamShorterThanBlockIsEmpty) {
  std::mt19937_64 rng(6);
  const ToeplitzSeed seed(random_bits(rng, 10 + 20 - 1), 10, 20);
  EXPECT_TRUE(extract_stream(seed, random_bits(rng, 19), 0.5).empty());
}

TEST(Toeplitz, GeometryErrors) {
  EXPECT_THROW(ToeplitzSeed(BitStream(10), 2, 3), GeometryError);
  EXPECT_THROW(ToeplitzSeed(BitStream(6), 4, 3), GeometryError);
  EXPECT_THROW(ToeplitzSeed(BitStream(2), 0, 3), GeometryError);
  const ToeplitzSeed seed(BitStream(7), 3, 5);
  EXPECT_THROW(extract_block(seed, BitStream(4)), LengthError);
  EXPECT_THROW(extract_stream(seed, BitStream(50), 0.5), GeometryError);  // 3/5 > 0.5
  EXPECT_THROW(extract_stream(seed, BitStream(50), 0.0), GeometryError);
  EXPECT_THROW(extract_stream(seed, BitStream(50), 1.5), GeometryError);
  EXPECT_NO_THROW(extract_stream(seed, BitStream(50), 0.6));
  EXPECT_THROW(seed.with_rows(6), GeometryError);
  EXPECT_THROW(rows_for_ratio(0.001, 100), GeometryError);
}

TEST(Toeplitz, WithRowsKeepsTopOfMatrix) {
  std::mt19937_64 rng(7);
  const ToeplitzSeed full(random_bits(rng, 100 + 200 - 1), 100, 200);
  const auto top = full.with_rows(37);
  const auto input = random_bits(rng, 200);
  EXPECT_EQ(extract_block(top, input), extract_block(full, input).slice(0, 37));
}

TEST(Toeplitz, SeedFileRoundTrip) {
  const auto dir = std::filesystem::temp_directory_path() / "qrng_toeplitz_test";
  std::filesystem::create_directories(dir);
  std::mt19937_64 rng(8);
  const ToeplitzSeed seed(random_bits(rng, 50 + 129 - 1), 50, 129);
  const auto path = dir / "seed.bin";
  write_seed_file(path, seed);
  EXPECT_EQ(std::filesystem::file_size(path), (50u + 129u - 1u + 7u) / 8u);
  const auto back = read_seed_file(path);
  EXPECT_EQ(back.rows(), 50u);
  EXPECT_EQ(back.cols(), 129u);
  EXPECT_EQ(back.bits(), seed.bits());

  // Explicit geometry uses a prefix of the stored bits.
  const auto smaller = read_seed_file(path, 10, 100);
  EXPECT_EQ(smaller.bits(), seed.bits().slice(0, 109));
  EXPECT_THROW(read_seed_file(path, 100, 129), GeometryError);
  EXPECT_THROW(read_seed_file(dir / "missing.bin"), IoError);
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace qrng
