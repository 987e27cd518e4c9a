#include <catch_amalgamated.hpp>

#include <lutcnn/architectures.hpp>
#include <lutcnn/reference.hpp>

#include "support/random_networks.hpp"

using namespace lutcnn;

namespace
{

split_config const hidden6 = split_config::from_tuple( { 6, 6, 6, 6, 1, 1, 6 } );

} // namespace

TEST_CASE( "seeded parameters are reproducible", "[architectures]" )
{
  auto const base = ecg_network( 6, hidden6 );
  CHECK( randomize_parameters( base, 9 ) == randomize_parameters( base, 9 ) );
  CHECK_FALSE( randomize_parameters( base, 9 ) == randomize_parameters( base, 10 ) );
  CHECK( validate_network( randomize_parameters( base, 9 ) ).empty() );
}

TEST_CASE( "gamma sign fractions", "[architectures]" )
{
  random_parameter_options opts;
  opts.negative_gamma = 1.0;
  opts.zero_gamma = 0.0;
  auto const spec = randomize_parameters( ecg_network( 6, hidden6 ), 1, opts );
  for ( auto const& l : spec.layers )
    if ( auto const* bn = std::get_if<batch_norm_layer>( &l ) )
      for ( auto g : bn->params.gamma )
        CHECK( g < 0.0 );
}

TEST_CASE( "batchnorm calibration centers every normalization", "[architectures]" )
{
  gen::rng_t rng( 14 );
  std::vector<std::vector<std::int64_t>> windows;
  for ( int i = 0; i < 4; ++i )
    windows.push_back( gen::random_samples( rng, 400, 12 ) );
  auto const spec = calibrate_batchnorm( randomize_parameters( ecg_network( 6, hidden6 ), 3 ), windows );
  CHECK( validate_network( spec ).empty() );

  // each calibrated input sits on the median, so at most half the values fall below it
  std::vector<forward_result> runs;
  for ( auto const& w : windows )
    runs.push_back( reference_forward( spec, w, { true } ) );
  auto const probes = runs.front().norm_inputs.size();
  CHECK( probes == 9u );
  for ( std::size_t p = 0; p < probes; ++p )
  {
    auto const& probe = runs.front().norm_inputs[p];
    auto const& l = spec.layers[probe.layer_index];
    auto const& bn = probe.inner ? std::get<split_conv_layer>( l ).inner_norm : std::get<batch_norm_layer>( l ).params;
    for ( std::size_t c = 0; c < probe.values.size(); ++c )
    {
      std::size_t below = 0, total = 0;
      for ( auto const& r : runs )
        for ( auto x : r.norm_inputs[p].values[c] )
        {
          below += x < bn.mu[c];
          ++total;
        }
      INFO( "probe " << p << " channel " << c );
      CHECK( 2 * below <= total );
      CHECK( bn.beta[c] == 0.0 );
    }
  }
  CHECK( calibrate_batchnorm( spec, {} ) == spec );
}
