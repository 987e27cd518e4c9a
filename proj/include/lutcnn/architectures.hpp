/*!
  \file architectures.hpp
  \brief Reference network layouts and seeded parameter initialization
*/

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "cost_model.hpp"
#include "ir.hpp"
#include "reference.hpp"

namespace lutcnn
{

/*! \brief First split block of the ECG layout: depthwise 10-tap convolution, then pointwise to c0 channels. */
inline split_config ecg_first_block( int c0 ) { return split_config::from_tuple( { 12, 10, 12, 12, 1, 1, c0 } ); }

namespace detail
{

inline split_conv_layer zero_split( split_config const& cfg )
{
  return { cfg,
           std::vector<double>( cfg.alpha.weight_count(), 0.0 ),
           std::vector<double>( static_cast<std::size_t>( cfg.alpha.f ), 0.0 ),
           batch_norm_params::identity( static_cast<std::size_t>( cfg.alpha.f ) ),
           std::vector<double>( cfg.beta.weight_count(), 0.0 ),
           std::vector<double>( static_cast<std::size_t>( cfg.beta.f ), 0.0 ) };
}

} // namespace detail

/*! \brief Training-order ECG classifier with zero weights and identity batchnorms.
 *
 * conv1d(k=1, 1->12), bnorm, binarize, split(first), maxpool(8, 6), then
 * three times split(hidden), maxpool(3, 2), each pool followed by bnorm and
 * binarize, and finally linear(c0 -> 1) and sigmoid.
 */
inline network_spec ecg_network( split_config const& first, split_config const& hidden, int input_bits = 12 )
{
  network_spec spec;
  spec.phase = network_phase::training;
  input_conv_layer in;
  in.params = { 1, 1, 1, first.alpha.c, 1 };
  in.input_bits = input_bits;
  in.weights.assign( in.params.weight_count(), 0.0 );
  in.bias.assign( static_cast<std::size_t>( in.params.f ), 0.0 );
  spec.layers.push_back( in );
  spec.layers.push_back( batch_norm_layer{ batch_norm_params::identity( static_cast<std::size_t>( in.params.f ) ) } );
  spec.layers.push_back( binarize_layer{} );

  auto add_block = [&]( split_config const& cfg, int kernel, int stride ) {
    spec.layers.push_back( detail::zero_split( cfg ) );
    spec.layers.push_back( max_pool_layer{ kernel, stride, {} } );
    spec.layers.push_back( batch_norm_layer{ batch_norm_params::identity( static_cast<std::size_t>( cfg.beta.f ) ) } );
    spec.layers.push_back( binarize_layer{} );
  };
  add_block( first, 8, 6 );
  for ( int i = 0; i < 3; ++i )
    add_block( hidden, 3, 2 );

  int const c0 = hidden.beta.f;
  spec.layers.push_back( linear_layer{ c0, 1, std::vector<double>( static_cast<std::size_t>( c0 ), 0.0 ), { 0.0 } } );
  spec.layers.push_back( sigmoid_layer{} );
  return spec;
}

/*! \brief ECG layout with the standard first block for `c0` channels. */
inline network_spec ecg_network( int c0, split_config const& hidden, int input_bits = 12 )
{
  return ecg_network( ecg_first_block( c0 ), hidden, input_bits );
}

struct random_parameter_options
{
  double weight_scale = 1.0;
  double negative_gamma = 0.3; /*!< fraction of batchnorm channels with gamma < 0 */
  double zero_gamma = 0.1;     /*!< fraction with gamma = 0 */
};

/*! \brief Overwrites every weight, bias and batchnorm parameter with seeded random values.
 *
 * Values are drawn from a 64-bit Mersenne twister with a fixed mapping to
 * [0, 1), so a seed gives the same network on every platform. Biases and
 * batchnorm shifts are scaled to the fan-in of the layer they follow so
 * that binary outputs are not constant.
 */
inline network_spec randomize_parameters( network_spec spec, std::uint64_t seed, random_parameter_options const& opts = {} )
{
  std::mt19937_64 rng( seed );
  auto unit = [&]() { return static_cast<double>( rng() >> 11 ) * 0x1.0p-53; };
  auto symmetric = [&]( double scale ) { return ( 2.0 * unit() - 1.0 ) * scale; };
  auto fill = [&]( std::vector<double>& v, double scale ) {
    for ( auto& x : v )
      x = symmetric( scale );
  };
  auto randomize_norm = [&]( batch_norm_params& bn, double spread ) {
    for ( std::size_t c = 0; c < bn.channels(); ++c )
    {
      bn.mu[c] = symmetric( spread );
      bn.sigma_sq[c] = 0.25 + 2.0 * unit();
      double const u = unit();
      double const magnitude = 0.25 + unit();
      bn.gamma[c] = u < opts.zero_gamma ? 0.0 : u < opts.zero_gamma + opts.negative_gamma ? -magnitude : magnitude;
      bn.beta[c] = symmetric( 0.5 );
    }
  };

  double spread = 1.0; // typical magnitude of the current pre-activation
  for ( auto& l : spec.layers )
    std::visit(
        [&]( auto& x ) {
          using T = std::decay_t<decltype( x )>;
          if constexpr ( std::is_same_v<T, input_conv_layer> )
          {
            double const amplitude = static_cast<double>( std::int64_t{ 1 } << ( x.input_bits - 1 ) );
            fill( x.weights, opts.weight_scale );
            spread = amplitude * opts.weight_scale * std::sqrt( static_cast<double>( x.params.k ) ) * 0.5;
            fill( x.bias, spread );
          }
          else if constexpr ( std::is_same_v<T, batch_norm_layer> )
          {
            randomize_norm( x.params, spread );
          }
          else if constexpr ( std::is_same_v<T, split_conv_layer> )
          {
            double const sa = opts.weight_scale * std::sqrt( static_cast<double>( fan_in( x.config.alpha ) ) ) * 0.5;
            fill( x.alpha_weights, opts.weight_scale );
            fill( x.alpha_bias, sa );
            randomize_norm( x.inner_norm, sa );
            spread = opts.weight_scale * std::sqrt( static_cast<double>( fan_in( x.config.beta ) ) ) * 0.5;
            fill( x.beta_weights, opts.weight_scale );
            fill( x.beta_bias, spread );
          }
          else if constexpr ( std::is_same_v<T, linear_layer> )
          {
            spread = opts.weight_scale * std::sqrt( static_cast<double>( x.in ) ) * 0.5;
            fill( x.weights, opts.weight_scale );
            fill( x.bias, spread );
          }
        },
        l );
  return spec;
}

/*! \brief Sets every batchnorm mean to the per-channel median of its input over `windows`.
 *
 * Normalizations are calibrated front to back, each after the ones before
 * it, the way running statistics settle during training. Other parameters
 * are left unchanged.
 */
inline network_spec calibrate_batchnorm( network_spec spec, std::vector<std::vector<std::int64_t>> const& windows )
{
  if ( windows.empty() )
    return spec;
  for ( std::size_t target = 0;; ++target )
  {
    std::vector<std::vector<double>> pooled; // [channel] -> values over all windows
    norm_probe const* probe = nullptr;
    std::vector<forward_result> runs;
    for ( auto const& w : windows )
      runs.push_back( reference_forward( spec, w, { true } ) );
    if ( target >= runs.front().norm_inputs.size() )
      return spec;
    probe = &runs.front().norm_inputs[target];
    pooled.resize( probe->values.size() );
    for ( auto const& r : runs )
      for ( std::size_t c = 0; c < pooled.size(); ++c )
        pooled[c].insert( pooled[c].end(), r.norm_inputs[target].values[c].begin(), r.norm_inputs[target].values[c].end() );

    auto& l = spec.layers[probe->layer_index];
    batch_norm_params& bn = probe->inner ? std::get<split_conv_layer>( l ).inner_norm : std::get<batch_norm_layer>( l ).params;
    for ( std::size_t c = 0; c < pooled.size(); ++c )
    {
      auto& v = pooled[c];
      if ( v.empty() )
        continue;
      std::nth_element( v.begin(), v.begin() + static_cast<std::ptrdiff_t>( v.size() / 2 ), v.end() );
      bn.mu[c] = v[v.size() / 2];
      bn.beta[c] = 0.0;
    }
  }
}

} // namespace lutcnn
