/*!
  \file oracles.hpp
  \brief Independent reimplementations used as test oracles

  Nothing here calls into the library code it checks.
*/

#pragma once

#include <array>
#include <cstdint>
#include <set>
#include <vector>

#include <lutcnn/decompose.hpp>
#include <lutcnn/ir.hpp>

namespace oracle
{

/*! \brief LUT count of one output with n inputs on 6-LUTs, from the integer closed form. */
inline std::uint64_t lut_cost6( int n )
{
  if ( n <= 6 )
    return 1u;
  std::int64_t const p = std::int64_t{ 1 } << ( n - 4 );
  std::int64_t const sign = n % 2 == 0 ? 1 : -1;
  return static_cast<std::uint64_t>( ( p - sign ) / 3 );
}

/*! \brief Evaluates a LUT tree by recursive descent from the root. */
inline bool eval_tree( lutcnn::lut_tree const& t, std::uint64_t input, std::uint32_t signal )
{
  auto const phi = static_cast<std::uint32_t>( t.phi );
  if ( signal < phi )
    return ( input >> signal ) & 1u;
  auto const& node = t.nodes.at( signal - phi );
  std::size_t idx = 0;
  for ( std::size_t i = 0; i < node.inputs.size(); ++i )
    if ( eval_tree( t, input, node.inputs[i] ) )
      idx |= std::size_t{ 1 } << i;
  return node.config.get( idx );
}

/*! \brief Every split configuration satisfying the block conditions and the fan-in bound, by brute force. */
inline std::set<std::array<int, 7>> naive_filter_pairs( int c0, int k0, int f0, int phi_max )
{
  std::set<std::array<int, 7>> out;
  std::array<std::array<int, 2>, 2> const seqs{ { { k0, 1 }, { 1, k0 } } };
  for ( auto const& [ka, kb] : seqs )
    for ( int ga = 1; ga <= c0; ++ga )
      for ( int c = 1; c <= phi_max * f0; ++c )
        for ( int gb = 1; gb <= f0; ++gb )
        {
          if ( c0 % ga || c % ga || c % gb || f0 % gb )
            continue;
          if ( ( c0 / ga ) * ka > phi_max || ( c / gb ) * kb > phi_max )
            continue;
          out.insert( { c0, ka, ga, c, kb, gb, f0 } );
        }
  return out;
}

} // namespace oracle
