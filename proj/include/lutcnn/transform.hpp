/*!
  \file transform.hpp
  \brief Deployment reordering, block identification and table precomputation
*/

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "cost_model.hpp"
#include "error.hpp"
#include "ir.hpp"
#include "truth_table.hpp"

namespace lutcnn
{

/*! \brief Moves every pooling layer behind its batchnorm and binarization.
 *
 * conv -> maxpool -> bnorm -> binarize becomes conv -> bnorm -> binarize ->
 * pool. Since binarization is nondecreasing, bin(bnorm(max x)) equals the OR
 * of the binarized values when gamma > 0 and their AND when gamma < 0;
 * channels with gamma = 0 are constant and get OR.
 */
inline network_spec reorder_for_deployment( network_spec const& spec )
{
  if ( spec.phase != network_phase::training )
    throw error( error_kind::state, "transform", "network is already in deployment order" );
  network_spec out;
  out.phase = network_phase::deployment;
  auto const& ls = spec.layers;
  for ( std::size_t i = 0; i < ls.size(); ++i )
  {
    auto const* pool = std::get_if<max_pool_layer>( &ls[i] );
    if ( pool == nullptr )
    {
      out.layers.push_back( ls[i] );
      continue;
    }
    auto const where = "layers[" + std::to_string( i ) + "] (max_pool)";
    if ( i == 0 || !( std::holds_alternative<split_conv_layer>( ls[i - 1] ) || std::holds_alternative<input_conv_layer>( ls[i - 1] ) ) )
      throw error( error_kind::structure, "transform", where + ": training-order pool must follow a convolution" );
    if ( i + 1 >= ls.size() || !std::holds_alternative<batch_norm_layer>( ls[i + 1] ) )
      throw error( error_kind::structure, "transform", where + ": missing batch_norm after pool" );
    if ( i + 2 >= ls.size() || !std::holds_alternative<binarize_layer>( ls[i + 2] ) )
      throw error( error_kind::structure, "transform", where + ": missing binarize after batch_norm" );
    auto const& bn = std::get<batch_norm_layer>( ls[i + 1] ).params;
    max_pool_layer p{ pool->kernel, pool->stride, {} };
    for ( auto g : bn.gamma )
      p.modes.push_back( g < 0.0 ? pool_mode::and_reduce : pool_mode::or_reduce );
    out.layers.push_back( ls[i + 1] );
    out.layers.push_back( ls[i + 2] );
    out.layers.push_back( p );
    i += 2;
  }
  return out;
}

/*! \brief A subnetwork between binary activations that becomes one truth table.
 *
 * The block is a grouped convolution, an optional batchnorm and a threshold
 * at zero. Each output reads only its own group window of phi bits; bit
 * `(t * s_in + j) * input_bits + b` of that window is bit b of local input
 * channel j at tap t (tap 0 oldest). Binary inputs use 1 for +1 and 0 for
 * -1; input blocks read two's complement integers.
 */
struct precomputable_block
{
  std::string id;
  block_kind kind = block_kind::hidden;
  std::size_t layer_index = 0;
  conv_params params;
  int input_bits = 1;
  std::vector<double> weights;
  std::vector<double> bias;
  std::optional<batch_norm_params> norm;

  int phi() const { return fan_in( params ) * input_bits; }
  int m() const { return params.f; }
  int input_width() const { return params.c * input_bits; }

  struct source
  {
    int channel;
    int tap;
    int bit;
  };

  /*! \brief Where window bit `index_bit` of output `o` comes from. */
  source source_of( int o, int index_bit ) const
  {
    int const b = index_bit % input_bits;
    int const rest = index_bit / input_bits;
    int const j = rest % params.s_in();
    int const t = rest / params.s_in();
    int const group = o / params.s_out();
    return { group * params.s_in() + j, t, b };
  }

  friend bool operator==( precomputable_block const&, precomputable_block const& ) = default;
};

/*! \brief Binary pooling stage between blocks. */
struct pool_stage
{
  std::string id;
  std::size_t layer_index = 0;
  int kernel = 1;
  int stride = 1;
  std::vector<pool_mode> modes;

  int channels() const { return static_cast<int>( modes.size() ); }

  friend bool operator==( pool_stage const&, pool_stage const& ) = default;
};

using pipeline_stage = std::variant<precomputable_block, pool_stage>;

inline std::string const& stage_id( pipeline_stage const& s )
{
  return std::visit( []( auto const& x ) -> std::string const& { return x.id; }, s );
}

/*! \brief Stage list of a deployment-order network. */
struct compile_plan
{
  std::vector<pipeline_stage> stages;
  int input_bits = 0;

  std::vector<precomputable_block> blocks() const
  {
    std::vector<precomputable_block> out;
    for ( auto const& s : stages )
      if ( auto const* b = std::get_if<precomputable_block>( &s ) )
        out.push_back( *b );
    return out;
  }

  std::vector<pool_stage> pools() const
  {
    std::vector<pool_stage> out;
    for ( auto const& s : stages )
      if ( auto const* p = std::get_if<pool_stage>( &s ) )
        out.push_back( *p );
    return out;
  }
};

/*! \brief Splits a deployment-order network into precomputable blocks and pool stages.
 *
 * Patterns: `input_conv [batch_norm] binarize`, `split_conv [batch_norm]
 * binarize` (two blocks, one per half), `max_pool` after a binarize, and
 * `linear [sigmoid]` as the output block.
 */
inline compile_plan identify_precomputable_blocks( network_spec const& spec, int fan_in_cap = default_fan_in_cap )
{
  if ( spec.phase != network_phase::deployment )
    throw error( error_kind::state, "transform", "block identification requires a deployment-order network" );
  require_valid( spec, "transform" );

  compile_plan plan;
  auto const& ls = spec.layers;
  int split_index = 0;
  int pool_index = 0;

  auto where = [&]( std::size_t i ) { return "layers[" + std::to_string( i ) + "] (" + std::string( layer_kind( ls[i] ) ) + ")"; };
  auto check_cap = [&]( precomputable_block const& b, std::size_t i, std::string const& part ) {
    if ( b.phi() > fan_in_cap )
      throw error( error_kind::capacity, "transform",
                   where( i ) + part + ": fan-in " + std::to_string( b.phi() ) + " exceeds cap " + std::to_string( fan_in_cap ) );
  };
  // consumes an optional batch_norm and a mandatory binarize after position i
  auto close_block = [&]( std::size_t i, std::optional<batch_norm_params>& norm ) -> std::size_t {
    std::size_t j = i + 1;
    if ( j < ls.size() )
      if ( auto const* bn = std::get_if<batch_norm_layer>( &ls[j] ) )
      {
        norm = bn->params;
        ++j;
      }
    if ( j >= ls.size() || !std::holds_alternative<binarize_layer>( ls[j] ) )
      throw error( error_kind::structure, "transform", where( i ) + ": block output is not binarized" );
    return j;
  };

  for ( std::size_t i = 0; i < ls.size(); ++i )
  {
    auto const& l = ls[i];
    if ( auto const* x = std::get_if<input_conv_layer>( &l ) )
    {
      precomputable_block b{ "input", block_kind::input, i, x->params, x->input_bits, x->weights, x->bias, std::nullopt };
      i = close_block( i, b.norm );
      check_cap( b, b.layer_index, "" );
      plan.input_bits = x->input_bits;
      plan.stages.push_back( std::move( b ) );
    }
    else if ( auto const* x = std::get_if<split_conv_layer>( &l ) )
    {
      ++split_index;
      auto const name = "split" + std::to_string( split_index );
      precomputable_block a{ name + "_alpha", block_kind::hidden, i, x->config.alpha, 1, x->alpha_weights, x->alpha_bias, x->inner_norm };
      precomputable_block b{ name + "_beta", block_kind::hidden, i, x->config.beta, 1, x->beta_weights, x->beta_bias, std::nullopt };
      check_cap( a, i, " alpha" );
      check_cap( b, i, " beta" );
      i = close_block( i, b.norm );
      plan.stages.push_back( std::move( a ) );
      plan.stages.push_back( std::move( b ) );
    }
    else if ( auto const* x = std::get_if<max_pool_layer>( &l ) )
    {
      ++pool_index;
      plan.stages.push_back( pool_stage{ "pool" + std::to_string( pool_index ), i, x->kernel, x->stride, x->modes } );
    }
    else if ( auto const* x = std::get_if<linear_layer>( &l ) )
    {
      precomputable_block b{ "output", block_kind::output, i, conv_params{ x->in, 1, 1, x->out, 1 }, 1, x->weights, x->bias, std::nullopt };
      check_cap( b, i, "" );
      if ( i + 1 < ls.size() && std::holds_alternative<sigmoid_layer>( ls[i + 1] ) )
        ++i;
      plan.stages.push_back( std::move( b ) );
    }
    else
    {
      throw error( error_kind::structure, "transform", where( i ) + ": non-binary gap between precomputable blocks" );
    }
  }
  return plan;
}

namespace detail
{

inline void precompute_rows( precomputable_block const& block, truth_table& table, std::size_t first, std::size_t last )
{
  auto const& p = block.params;
  int const s_in = p.s_in();
  int const bits = block.input_bits;
  std::vector<double> x( static_cast<std::size_t>( s_in * p.k ) ); // [j * k + t]
  for ( std::size_t row = first; row < last; ++row )
  {
    for ( int t = 0; t < p.k; ++t )
      for ( int j = 0; j < s_in; ++j )
      {
        int const base = ( t * s_in + j ) * bits;
        double v;
        if ( block.kind == block_kind::input )
        {
          std::int64_t raw = static_cast<std::int64_t>( ( row >> base ) & ( ( std::uint64_t{ 1 } << bits ) - 1u ) );
          if ( raw >= ( std::int64_t{ 1 } << ( bits - 1 ) ) )
            raw -= std::int64_t{ 1 } << bits;
          v = static_cast<double>( raw );
        }
        else
          v = ( ( row >> base ) & 1u ) ? 1.0 : -1.0;
        x[static_cast<std::size_t>( j * p.k + t )] = v;
      }
    for ( int o = 0; o < p.f; ++o )
    {
      double acc = 0.0;
      for ( int j = 0; j < s_in; ++j )
        for ( int t = 0; t < p.k; ++t )
          acc += block.weights[static_cast<std::size_t>( ( o * s_in + j ) * p.k + t )] * x[static_cast<std::size_t>( j * p.k + t )];
      double y = acc + block.bias[static_cast<std::size_t>( o )];
      if ( block.norm )
        y = block.norm->apply( static_cast<std::size_t>( o ), y );
      table.set( row, o, y >= 0.0 );
    }
  }
}

} // namespace detail

/*! \brief Evaluates a block on all 2^phi inputs.
 *
 * Rows are split across `threads` workers on 64-row boundaries, so the
 * result is identical to a sequential evaluation.
 */
inline truth_table precompute_block( precomputable_block const& block, int fan_in_cap = default_fan_in_cap, unsigned threads = 0 )
{
  if ( block.phi() > fan_in_cap )
    throw error( error_kind::capacity, "transform",
                 block.id + ": fan-in " + std::to_string( block.phi() ) + " exceeds cap " + std::to_string( fan_in_cap ) );
  auto finite = []( std::vector<double> const& v ) { return std::all_of( v.begin(), v.end(), []( double x ) { return std::isfinite( x ); } ); };
  bool ok = finite( block.weights ) && finite( block.bias );
  if ( block.norm )
    ok = ok && finite( block.norm->mu ) && finite( block.norm->sigma_sq ) && finite( block.norm->gamma ) && finite( block.norm->beta );
  if ( !ok )
    throw error( error_kind::numeric, "transform", block.id + ": non-finite parameter" );
  if ( block.weights.size() != block.params.weight_count() || block.bias.size() != static_cast<std::size_t>( block.params.f ) )
    throw error( error_kind::structure, "transform", block.id + ": weight count does not match parameters" );

  truth_table table( block.id, block.kind, block.phi(), block.m() );
  std::size_t const rows = table.rows();
  if ( threads == 0 )
    threads = rows >= ( std::size_t{ 1 } << 14 ) ? std::max( 1u, std::thread::hardware_concurrency() ) : 1u;
  if ( threads <= 1 || rows < 128 )
  {
    detail::precompute_rows( block, table, 0, rows );
    return table;
  }
  std::size_t chunk = ( rows + threads - 1 ) / threads;
  chunk = ( chunk + 63u ) / 64u * 64u;
  std::vector<std::jthread> workers;
  for ( std::size_t first = 0; first < rows; first += chunk )
    workers.emplace_back( [&, first] { detail::precompute_rows( block, table, first, std::min( rows, first + chunk ) ); } );
  workers.clear();
  return table;
}

/*! \brief Table row index seen by output `o` for a full input window.
 *
 * `window` holds `k * c * input_bits` bits laid out as bit
 * `(t * c + channel) * input_bits + b`.
 */
inline std::size_t group_window_index( precomputable_block const& block, int o, bit_vector const& window )
{
  std::size_t idx = 0;
  int const c = block.params.c;
  for ( int i = 0; i < block.phi(); ++i )
  {
    auto const src = block.source_of( o, i );
    if ( window.get( static_cast<std::size_t>( ( src.tap * c + src.channel ) * block.input_bits + src.bit ) ) )
      idx |= std::size_t{ 1 } << i;
  }
  return idx;
}

/*! \brief All m outputs of a block for a full input window, via its table. */
inline bit_vector evaluate_block( precomputable_block const& block, truth_table const& table, bit_vector const& window )
{
  bit_vector out( static_cast<std::size_t>( block.m() ) );
  for ( int o = 0; o < block.m(); ++o )
    out.set( static_cast<std::size_t>( o ), table.get( group_window_index( block, o, window ), o ) );
  return out;
}

} // namespace lutcnn
