/*!
  \file decompose.hpp
  \brief Decomposition of truth tables into trees of bounded fan-in LUTs
*/

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bit_vector.hpp"
#include "cost_model.hpp"
#include "error.hpp"
#include "truth_table.hpp"

namespace lutcnn
{

/*! \brief LUT of at most k inputs; config bit i is the output for input pattern i. */
struct tree_node
{
  std::vector<std::uint32_t> inputs;
  bit_vector config;

  friend bool operator==( tree_node const&, tree_node const& ) = default;
};

/*! \brief LUT tree implementing one output of a table.
 *
 * Signal ids below `phi` are the table's input variables; id `phi + i` is
 * the output of `nodes[i]`. Nodes are stored children first.
 */
struct lut_tree
{
  int phi = 0;
  std::vector<tree_node> nodes;
  std::uint32_t root = 0;
};

namespace detail
{

class tree_builder
{
public:
  tree_builder( lut_tree& tree, int k_lut ) : tree_( tree ), k_lut_( k_lut ) {}

  std::uint32_t build( bit_vector const& f, std::vector<std::uint32_t> const& vars )
  {
    int const n = static_cast<int>( vars.size() );
    if ( n <= k_lut_ )
      return add( vars, f );

    std::size_t const half = std::size_t{ 1 } << ( n - 1 );
    if ( ( n - k_lut_ ) % 2 == 1 )
    {
      // two (n-1)-trees and a 3-input selector on the top variable
      std::vector<std::uint32_t> sub( vars.begin(), vars.end() - 1 );
      auto const t0 = build( slice( f, 0, half ), sub );
      auto const t1 = build( slice( f, half, half ), sub );
      bit_vector mux( 8u );
      for ( std::size_t i = 0; i < 8u; ++i )
        mux.set( i, ( i & 4u ) ? ( i & 2u ) : ( i & 1u ) );
      return add( { t0, t1, vars.back() }, mux );
    }

    // four (n-2)-trees and a 6-input selector on the two top variables
    std::size_t const quarter = half >> 1;
    std::vector<std::uint32_t> sub( vars.begin(), vars.end() - 2 );
    std::uint32_t t[4];
    for ( std::size_t q = 0; q < 4u; ++q )
      t[q] = build( slice( f, q * quarter, quarter ), sub );
    bit_vector mux( 64u );
    for ( std::size_t i = 0; i < 64u; ++i )
      mux.set( i, ( i >> ( i >> 4 ) ) & 1u );
    return add( { t[0], t[1], t[2], t[3], vars[vars.size() - 2], vars.back() }, mux );
  }

private:
  static bit_vector slice( bit_vector const& f, std::size_t first, std::size_t count )
  {
    bit_vector out( count );
    for ( std::size_t i = 0; i < count; ++i )
      out.set( i, f.get( first + i ) );
    return out;
  }

  std::uint32_t add( std::vector<std::uint32_t> inputs, bit_vector config )
  {
    tree_.nodes.push_back( { std::move( inputs ), std::move( config ) } );
    return static_cast<std::uint32_t>( tree_.phi ) + static_cast<std::uint32_t>( tree_.nodes.size() - 1u );
  }

  lut_tree& tree_;
  int k_lut_;
};

} // namespace detail

/*! \brief Builds the LUT tree of a single-output function of `phi` variables.
 *
 * The node count equals `lut_cost_recursive( phi, k_lut )`. The 6-input
 * selector of the even step needs `k_lut >= 6`.
 */
inline lut_tree decompose_function( bit_vector const& function, int phi, int k_lut = default_lut_inputs )
{
  if ( k_lut < 6 )
    throw error( error_kind::domain, "netlist", "decomposition needs LUTs with at least 6 inputs" );
  if ( phi < 1 || function.size() != ( std::size_t{ 1 } << phi ) )
    throw error( error_kind::domain, "netlist", "function size does not match fan-in" );
  lut_tree tree;
  tree.phi = phi;
  std::vector<std::uint32_t> vars( static_cast<std::size_t>( phi ) );
  for ( int i = 0; i < phi; ++i )
    vars[static_cast<std::size_t>( i )] = static_cast<std::uint32_t>( i );
  detail::tree_builder builder( tree, k_lut );
  tree.root = builder.build( function, vars );
  return tree;
}

/*! \brief One LUT tree per output of a table. */
inline std::vector<lut_tree> decompose_table( truth_table const& t, int k_lut = default_lut_inputs )
{
  std::vector<lut_tree> out;
  out.reserve( static_cast<std::size_t>( t.m() ) );
  for ( int o = 0; o < t.m(); ++o )
    out.push_back( decompose_function( t.column( o ), t.phi(), k_lut ) );
  return out;
}

/*! \brief Evaluates a tree on one input pattern. */
inline bool evaluate( lut_tree const& tree, std::size_t input )
{
  std::vector<std::uint8_t> values( tree.nodes.size() );
  auto const phi = static_cast<std::uint32_t>( tree.phi );
  auto value_of = [&]( std::uint32_t s ) -> bool {
    return s < phi ? ( ( input >> s ) & 1u ) : values[s - phi];
  };
  for ( std::size_t n = 0; n < tree.nodes.size(); ++n )
  {
    std::size_t idx = 0;
    auto const& node = tree.nodes[n];
    for ( std::size_t i = 0; i < node.inputs.size(); ++i )
      if ( value_of( node.inputs[i] ) )
        idx |= std::size_t{ 1 } << i;
    values[n] = node.config.get( idx );
  }
  return value_of( tree.root );
}

} // namespace lutcnn
