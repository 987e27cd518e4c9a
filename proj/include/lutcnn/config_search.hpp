/*!
  \file config_search.hpp
  \brief Enumeration, scoring and selection of split configurations
*/

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "cost_model.hpp"
#include "ir.hpp"

namespace lutcnn
{

/*! \brief Reduced non-negative fraction. */
struct rational
{
  std::int64_t num = 0;
  std::int64_t den = 1;

  static rational make( std::int64_t n, std::int64_t d )
  {
    auto const g = std::gcd( n, d );
    return { n / g, d / g };
  }

  double value() const { return static_cast<double>( num ) / static_cast<double>( den ); }

  friend bool operator==( rational const&, rational const& ) = default;
  friend std::strong_ordering operator<=>( rational const& a, rational const& b )
  {
    return a.num * b.den <=> b.num * a.den;
  }
};

inline std::string to_string( rational const& r ) { return std::to_string( r.num ) + "/" + std::to_string( r.den ); }

/*! \brief Kernel placement inside a split block: (k_0, 1) or (1, k_0). */
enum class kernel_order
{
  kernel_first,
  kernel_last
};

inline std::vector<int> divisors( int n )
{
  std::vector<int> out;
  for ( int d = 1; d <= n; ++d )
    if ( n % d == 0 )
      out.push_back( d );
  return out;
}

/*! \brief All split configurations of `f0` whose halves have fan-in at most `phi_max`.
 *
 * Follows the enumeration order of the search procedure: divisors g_a of
 * c_0 admissible for the first half, divisors g_b of f_0, then intermediate
 * widths c = g_a, 2 g_a, ... while the second-half fan-in stays in bound,
 * keeping those divisible by g_b. Only c_0, k_0 and f_0 of `f0` are used.
 * The result is deduplicated and sorted by tuple form.
 */
inline std::vector<split_config> find_filter_pairs( conv_params const& f0, int phi_max,
                                                    std::vector<kernel_order> const& orders = { kernel_order::kernel_first,
                                                                                                kernel_order::kernel_last } )
{
  std::set<std::array<int, 7>> found;
  if ( phi_max < 1 || f0.c < 1 || f0.k < 1 || f0.f < 1 )
    return {};

  for ( auto order : orders )
  {
    int const k_a = order == kernel_order::kernel_first ? f0.k : 1;
    int const k_b = order == kernel_order::kernel_first ? 1 : f0.k;

    std::vector<int> d_alpha;
    for ( int g_a : divisors( f0.c ) )
      if ( ( f0.c / g_a ) * k_a <= phi_max )
        d_alpha.push_back( g_a );

    for ( int g_a : d_alpha )
    {
      for ( int g_b : divisors( f0.f ) )
      {
        std::vector<int> cs;
        int c = g_a;
        // fan-in grows with c; the bound c <= phi_max * g_b is implied for k_b >= 1
        while ( ( c / g_b ) * k_b <= phi_max && c <= phi_max * g_b )
        {
          if ( c % g_b == 0 )
            cs.push_back( c );
          c += g_a;
        }
        for ( int width : cs )
          found.insert( { f0.c, k_a, g_a, width, k_b, g_b, f0.f } );
      }
    }
  }

  std::vector<split_config> out;
  out.reserve( found.size() );
  for ( auto const& t : found )
    out.push_back( split_config::from_tuple( t ) );
  return out;
}

/*! \brief Cross layer connectivity: ceil(g_a / g_b) / g_a.
 *
 * Fraction of the block's input channels that can influence each output channel.
 */
inline rational clc( split_config const& cfg )
{
  std::int64_t const ga = cfg.alpha.g;
  std::int64_t const gb = cfg.beta.g;
  return rational::make( ( ga + gb - 1 ) / gb, ga );
}

/*! \brief CLC^2 * phi_a * phi_b / ln(cost)^2 */
inline double score_value( double clc_value, int phi_alpha, int phi_beta, lut_count cost )
{
  double const l = std::log( static_cast<double>( cost.value ) );
  return clc_value * clc_value * static_cast<double>( phi_alpha ) * static_cast<double>( phi_beta ) / ( l * l );
}

/*! \brief Pre-training score of a split configuration.
 *
 * The cost term is the sum of both per-half LUT costs, C(phi_a, f_a) + C(phi_b, f_b),
 * and the logarithm is natural.
 */
inline double score( split_config const& cfg, int k_lut = default_lut_inputs )
{
  return score_value( clc( cfg ).value(), fan_in( cfg.alpha ), fan_in( cfg.beta ), split_block_cost( cfg, k_lut ) );
}

/*! \brief Mean score over all split blocks of a network; 0 if there are none. */
inline double network_score( network_spec const& spec, int k_lut = default_lut_inputs )
{
  double sum = 0.0;
  int n = 0;
  for ( auto const& l : spec.layers )
    if ( auto const* x = std::get_if<split_conv_layer>( &l ) )
    {
      sum += score( x->config, k_lut );
      ++n;
    }
  return n == 0 ? 0.0 : sum / n;
}

struct scored_config
{
  split_config cfg;
  int phi_alpha = 0;
  int phi_beta = 0;
  rational clc;
  double score = 0.0;
  lut_count block_cost;
  lut_count analytic_cost; /*!< cost used for budget filtering; network-level when a template is used */
};

/*! \brief Scores a configuration; `analytic_cost` defaults to the block cost. */
inline scored_config score_config( split_config const& cfg, int k_lut = default_lut_inputs,
                                   std::optional<lut_count> analytic_cost = std::nullopt )
{
  scored_config s;
  s.cfg = cfg;
  s.phi_alpha = fan_in( cfg.alpha );
  s.phi_beta = fan_in( cfg.beta );
  s.clc = clc( cfg );
  s.block_cost = split_block_cost( cfg, k_lut );
  s.score = score_value( s.clc.value(), s.phi_alpha, s.phi_beta, s.block_cost );
  s.analytic_cost = analytic_cost.value_or( s.block_cost );
  return s;
}

struct rank_options
{
  std::optional<lut_count> budget;
  std::optional<std::size_t> top;
  std::optional<double> threshold; /*!< keep scores strictly above */
};

/*! \brief Filters by budget and sorts by descending score.
 *
 * Ties are broken by ascending analytic cost, then by tuple form.
 */
inline std::vector<scored_config> rank_configs( std::vector<scored_config> configs, rank_options const& opts = {} )
{
  if ( opts.budget )
    std::erase_if( configs, [&]( auto const& s ) { return s.analytic_cost > *opts.budget; } );
  if ( opts.threshold )
    std::erase_if( configs, [&]( auto const& s ) { return !( s.score > *opts.threshold ); } );
  std::sort( configs.begin(), configs.end(), []( auto const& a, auto const& b ) {
    if ( a.score != b.score )
      return a.score > b.score;
    if ( a.analytic_cost != b.analytic_cost )
      return a.analytic_cost < b.analytic_cost;
    return a.cfg.tuple() < b.cfg.tuple();
  } );
  if ( opts.top && configs.size() > *opts.top )
    configs.resize( *opts.top );
  return configs;
}

inline nlohmann::json to_json( scored_config const& s )
{
  return { { "tuple", s.cfg.tuple() },
           { "phi_alpha", s.phi_alpha },
           { "phi_beta", s.phi_beta },
           { "clc", to_string( s.clc ) },
           { "score", s.score },
           { "block_cost", s.block_cost.value },
           { "network_cost", s.analytic_cost.value } };
}

struct pareto_point
{
  lut_count cost;
  double accuracy = 0.0;
  std::string id;
};

inline bool dominates( pareto_point const& a, pareto_point const& b )
{
  return a.cost <= b.cost && a.accuracy >= b.accuracy && ( a.cost < b.cost || a.accuracy > b.accuracy );
}

/*! \brief Non-dominated points in (low cost, high accuracy), ordered by ascending cost. */
inline std::vector<pareto_point> pareto_front( std::vector<pareto_point> points )
{
  std::sort( points.begin(), points.end(), []( auto const& a, auto const& b ) {
    if ( a.cost != b.cost )
      return a.cost < b.cost;
    if ( a.accuracy != b.accuracy )
      return a.accuracy > b.accuracy;
    return a.id < b.id;
  } );
  // dominators sort before the points they dominate
  std::vector<pareto_point> front;
  for ( auto const& p : points )
  {
    bool dominated = false;
    for ( auto it = front.rbegin(); it != front.rend(); ++it )
      if ( dominates( *it, p ) )
      {
        dominated = true;
        break;
      }
    if ( !dominated )
      front.push_back( p );
  }
  return front;
}

struct experiment_entry
{
  double score = 0.0;
  lut_count cost;
  double accuracy = 0.0;
  std::string id;
};

/*! \brief Ordered pairs (i, j) with S_i < S_j but neither A_i < A_j nor C_i > C_j.
 *
 * A higher score is expected to buy either higher accuracy or lower cost;
 * the returned pairs break that expectation. Pairs with equal scores are skipped.
 */
inline std::vector<std::pair<std::size_t, std::size_t>> score_condition_violations( std::vector<experiment_entry> const& entries )
{
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for ( std::size_t i = 0; i < entries.size(); ++i )
    for ( std::size_t j = 0; j < entries.size(); ++j )
    {
      auto const& a = entries[i];
      auto const& b = entries[j];
      if ( a.score < b.score && !( a.accuracy < b.accuracy ) && !( a.cost > b.cost ) )
        out.emplace_back( i, j );
    }
  return out;
}

} // namespace lutcnn
