/*!
  \file cost_model.hpp
  \brief Analytic worst-case LUT counts

  An n-input, 1-output truth table fits one k-input LUT for n <= k. Larger
  tables are composed from smaller trees: an odd step joins two (n-1)-trees
  with a 3-input selector, an even step joins four (n-2)-trees with a
  6-input selector. This gives

      C_n = 1                      if n <= k
      C_n = 2 C_{n-1} - (-1)^n     otherwise (k = 6)

  No logic optimization is assumed, so the counts are upper bounds.
*/

#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "error.hpp"
#include "ir.hpp"

namespace lutcnn
{

/*! \brief Number of physical LUTs. */
struct lut_count
{
  std::uint64_t value = 0;

  friend auto operator<=>( lut_count const&, lut_count const& ) = default;
  friend lut_count operator+( lut_count a, lut_count b ) { return { a.value + b.value }; }
  lut_count& operator+=( lut_count b )
  {
    value += b.value;
    return *this;
  }
};

inline constexpr int default_lut_inputs = 6;
inline constexpr int max_cost_fan_in = 60;

/*! \brief LUT count C_n of an n-to-1 truth table built from `k_lut`-input LUTs.
 *
 * For `k_lut != 6` the same doubling pattern is applied relative to `k_lut`
 * (odd steps when n - k_lut is odd), which is an approximation.
 */
inline lut_count lut_cost_recursive( int n, int k_lut = default_lut_inputs )
{
  if ( n < 1 )
    throw error( error_kind::domain, "cost_model", "fan-in must be at least 1 (got " + std::to_string( n ) + ")" );
  if ( k_lut < 2 )
    throw error( error_kind::domain, "cost_model", "LUT arity must be at least 2" );
  if ( n > max_cost_fan_in )
    throw error( error_kind::domain, "cost_model", "fan-in " + std::to_string( n ) + " exceeds the supported maximum" );
  std::uint64_t c = 1;
  for ( int i = k_lut + 1; i <= n; ++i )
    c = ( ( i - k_lut ) % 2 == 1 ) ? 2 * c + 1 : 2 * c - 1;
  return { c };
}

/*! \brief Closed form (Y/3)(2^(X-4) - (-1)^X) for 6-input LUTs.
 *
 * Agrees with the recursion for X >= 5 only; below that it is not a
 * physical count (it even goes negative), which is why `lut_cost` does not
 * use it.
 */
inline double lut_cost_closed_form( int x, int y )
{
  double const sign = ( x % 2 == 0 ) ? 1.0 : -1.0;
  double const p = x >= 4 ? static_cast<double>( std::uint64_t{ 1 } << ( x - 4 ) ) : 1.0 / static_cast<double>( 1 << ( 4 - x ) );
  return static_cast<double>( y ) / 3.0 * ( p - sign );
}

/*! \brief LUT count of an X-to-Y truth table: Y independent X-input trees. */
inline lut_count lut_cost( int x, int y, int k_lut = default_lut_inputs )
{
  if ( y < 1 )
    throw error( error_kind::domain, "cost_model", "output count must be at least 1 (got " + std::to_string( y ) + ")" );
  return { static_cast<std::uint64_t>( y ) * lut_cost_recursive( x, k_lut ).value };
}

inline int fan_in( conv_params const& p ) { return p.k * p.s_in(); }

/*! \brief Cost of both precomputed halves of a split block. */
inline lut_count split_block_cost( split_config const& cfg, int k_lut = default_lut_inputs )
{
  if ( !is_valid( cfg ) )
    throw error( error_kind::domain, "cost_model", "invalid split configuration " + to_string( cfg ) );
  return lut_cost( fan_in( cfg.alpha ), cfg.alpha.f, k_lut ) + lut_cost( fan_in( cfg.beta ), cfg.beta.f, k_lut );
}

/*! \brief Binary pooling, one single-output table of `kernel` inputs per channel. */
inline lut_count pool_cost( int kernel, int channels, int k_lut = default_lut_inputs )
{
  return lut_cost( kernel, channels, k_lut );
}

struct cost_item
{
  std::string name;
  int fan_in = 0;
  int outputs = 0;
  lut_count luts;
};

struct cost_report
{
  int k_lut = default_lut_inputs;
  std::vector<cost_item> items;
  lut_count total;
};

/*! \brief Itemized analytic cost of a deployment-order network.
 *
 * Items: the input block, both halves of every split block, every pooling
 * stage, and the output layer. Item names match the compiled stage ids.
 */
inline cost_report network_cost( network_spec const& spec, int k_lut = default_lut_inputs )
{
  if ( spec.phase != network_phase::deployment )
    throw error( error_kind::state, "cost_model", "network cost requires a deployment-order network" );
  cost_report report;
  report.k_lut = k_lut;
  int channels = 0;
  int split_index = 0;
  int pool_index = 0;
  auto add = [&]( std::string name, int phi, int m ) {
    auto const luts = lut_cost( phi, m, k_lut );
    report.items.push_back( { std::move( name ), phi, m, luts } );
    report.total += luts;
  };
  for ( auto const& l : spec.layers )
  {
    if ( auto const* x = std::get_if<input_conv_layer>( &l ) )
    {
      add( "input", fan_in( x->params ) * x->input_bits, x->params.f );
      channels = x->params.f;
    }
    else if ( auto const* x = std::get_if<split_conv_layer>( &l ) )
    {
      ++split_index;
      add( "split" + std::to_string( split_index ) + "_alpha", fan_in( x->config.alpha ), x->config.alpha.f );
      add( "split" + std::to_string( split_index ) + "_beta", fan_in( x->config.beta ), x->config.beta.f );
      channels = x->config.beta.f;
    }
    else if ( auto const* x = std::get_if<max_pool_layer>( &l ) )
    {
      ++pool_index;
      add( "pool" + std::to_string( pool_index ), x->kernel, channels );
    }
    else if ( auto const* x = std::get_if<linear_layer>( &l ) )
    {
      add( "output", x->in, x->out );
      channels = x->out;
    }
  }
  return report;
}

inline nlohmann::json to_json( cost_report const& r )
{
  nlohmann::json out;
  out["k_lut"] = r.k_lut;
  out["total"] = r.total.value;
  out["pool_model"] = "one single-output table of kernel inputs per channel";
  out["per_layer"] = nlohmann::json::array();
  for ( auto const& it : r.items )
    out["per_layer"].push_back( { { "name", it.name }, { "fan_in", it.fan_in }, { "outputs", it.outputs }, { "luts", it.luts.value } } );
  return out;
}

} // namespace lutcnn
