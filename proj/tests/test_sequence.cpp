#include <cmath>

#include <gtest/gtest.h>

#include "nkv/sequence.hpp"

using nkv::Sequence;

TEST(Sequence, ClosedForms) {
  EXPECT_EQ(Sequence().at(7), 0.0);
  EXPECT_EQ(Sequence::constant(0.3).at(100), 0.3);
  EXPECT_DOUBLE_EQ(Sequence::geometric(2.0, 0.5).at(3), 0.25);
  EXPECT_DOUBLE_EQ(Sequence::power(1.0, 2.0).at(0), 1.0);
  EXPECT_DOUBLE_EQ(Sequence::power(1.0, 2.0).at(4), 1.0 / 16);
  const Sequence t = Sequence::table({3, 2, 1});
  EXPECT_EQ(t.at(1), 2.0);
  EXPECT_EQ(t.at(50), 1.0);
  EXPECT_DOUBLE_EQ(Sequence::constant(1).plus(0.5).scaled(2).at(3), 3.0);
}

TEST(Sequence, SupAndTail) {
  EXPECT_DOUBLE_EQ(Sequence::geometric(1.0, 0.5).sup_from(2), 0.25);
  EXPECT_TRUE(std::isinf(Sequence::geometric(1.0, 2.0).sup_from(0)));
  EXPECT_DOUBLE_EQ(Sequence::geometric(1.0, 0.5).tail_sum(1), 1.0);
  EXPECT_TRUE(std::isinf(Sequence::constant(0.1).tail_sum(0)));
  EXPECT_EQ(Sequence::constant(0.0).tail_sum(0), 0.0);
  EXPECT_TRUE(std::isinf(Sequence::power(1.0, 1.0).tail_sum(3)));
  EXPECT_DOUBLE_EQ(Sequence::table({1, 2, 0}).tail_sum(1), 2.0);
  EXPECT_TRUE(std::isinf(Sequence::table({1, 2}).tail_sum(0)));
  EXPECT_TRUE(std::isinf(Sequence::geometric(1.0, 0.5).plus(1e-9).tail_sum(0)));
}

TEST(Sequence, PowerTailIsAnUpperBound) {
  for (double p : {1.5, 2.0, 3.0}) {
    for (std::size_t m : {0u, 1u, 2u, 10u}) {
      const Sequence s = Sequence::power(0.7, p);
      double direct = 0.0;
      for (std::size_t k = m; k < 2000000; ++k) direct += s.at(k);
      EXPECT_GE(s.tail_sum(m), direct) << p << " " << m;
    }
  }
}

TEST(Sequence, Validation) {
  EXPECT_THROW(Sequence::constant(-1).validate_nonnegative("x"), nkv::PreconditionError);
  EXPECT_THROW(Sequence::table({1, NAN}).validate_nonnegative("x"), nkv::PreconditionError);
  EXPECT_THROW(Sequence::geometric(1, -0.5).validate_nonnegative("x"), nkv::PreconditionError);
  EXPECT_NO_THROW(Sequence::power(1, 2).validate_nonnegative("x"));
}
