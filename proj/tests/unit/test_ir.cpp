#include <catch_amalgamated.hpp>

#include <algorithm>
#include <string>

#include <lutcnn/architectures.hpp>
#include <lutcnn/ir.hpp>

#include "support/random_networks.hpp"

using namespace lutcnn;

namespace
{

bool mentions( std::vector<std::string> const& report, std::string const& needle )
{
  return std::any_of( report.begin(), report.end(), [&]( auto const& s ) { return s.find( needle ) != std::string::npos; } );
}

} // namespace

TEST_CASE( "grouped convolution validity", "[ir]" )
{
  CHECK( conv_params{ 12, 10, 12, 12, 1 }.valid() );
  CHECK( conv_params{ 12, 10, 12, 12, 1 }.s_in() == 1 );
  CHECK( conv_params{ 12, 1, 3, 6, 1 }.weight_count() == 24u );
  CHECK_FALSE( conv_params{ 12, 1, 5, 10, 1 }.valid() );
  CHECK_FALSE( conv_params{ 0, 1, 1, 1, 1 }.valid() );

  auto const v = conv_violations( { 12, 1, 5, 10, 1 } );
  REQUIRE( v.size() == 1u );
  CHECK( v.front().find( "c=12, g=5" ) != std::string::npos );
}

TEST_CASE( "shape propagation of valid convolutions", "[ir]" )
{
  CHECK( propagate_shape( { 12, 10, 12, 12, 1 }, { 12, 100 } ) == tensor_shape{ 12, 91 } );
  CHECK( propagate_shape( { 1, 3, 1, 4, 2 }, { 1, 10 } ) == tensor_shape{ 4, 4 } );
  CHECK( propagate_shape( { 1, 3, 1, 4, 1 }, { 1, 2 } ).length == 0 );
  CHECK( propagate_shape( { 2, 1, 1, 4, 1 }, { 1, 5 } ).length == 0 );
}

TEST_CASE( "split condition", "[ir]" )
{
  auto const ok = split_config::from_tuple( { 12, 10, 12, 12, 1, 1, 6 } );
  CHECK( is_valid( ok ) );
  CHECK( ok.kernel() == 10 );
  CHECK( ok.replaced() == conv_params{ 12, 10, 1, 6, 1 } );
  CHECK( ok.tuple() == std::array<int, 7>{ 12, 10, 12, 12, 1, 1, 6 } );
  CHECK( to_string( ok ) == "(12,10,12,12,1,1,6)" );

  // both halves with a temporal kernel
  CHECK( mentions( split_violations( split_config::from_tuple( { 6, 3, 1, 6, 2, 1, 6 } ) ), "k_alpha, k_beta" ) );
  // g_beta must divide f_alpha
  CHECK( mentions( split_violations( split_config::from_tuple( { 6, 1, 1, 4, 3, 3, 6 } ) ), "g_beta does not divide f_alpha" ) );
  // channel chaining is enforced when halves are built separately
  split_config broken = ok;
  broken.beta.c = 6;
  CHECK( mentions( split_violations( broken ), "c_beta != f_alpha" ) );
}

TEST_CASE( "batchnorm evaluation", "[ir]" )
{
  batch_norm_params bn{ { 1.0 }, { 2.0 }, { -3.0 }, { 0.5 } };
  CHECK( bn.apply( 0, 5.0 ) == ( 5.0 - 1.0 ) / 2.0 * -3.0 - 0.5 );
  auto const id = batch_norm_params::identity( 3 );
  CHECK( id.channels() == 3u );
  CHECK( id.apply( 2, -7.25 ) == -7.25 );
}

TEST_CASE( "ECG layout validates in training order", "[ir]" )
{
  auto const spec = ecg_network( 6, split_config::from_tuple( { 6, 6, 6, 6, 1, 1, 6 } ) );
  CHECK( validate_network( spec ).empty() );
  CHECK_NOTHROW( require_valid( spec, "ir" ) );
  CHECK( spec.layers.size() == 3u + 4u * 4u + 2u );
}

TEST_CASE( "validation reports chained channel mismatches", "[ir]" )
{
  auto spec = ecg_network( 6, split_config::from_tuple( { 6, 6, 6, 6, 1, 1, 6 } ) );
  auto& lin = std::get<linear_layer>( spec.layers[spec.layers.size() - 2] );
  lin.in = 5;
  lin.weights.resize( 5 );
  auto const report = validate_network( spec );
  CHECK( mentions( report, "expects 5 inputs, got 6" ) );

  try
  {
    require_valid( spec, "ir" );
    FAIL( "expected a structure error" );
  }
  catch ( error const& e )
  {
    CHECK( e.kind() == error_kind::structure );
    CHECK( e.module() == "ir" );
  }
}

TEST_CASE( "validation rejects misplaced and malformed layers", "[ir]" )
{
  network_spec empty_start;
  empty_start.layers.push_back( binarize_layer{} );
  CHECK( mentions( validate_network( empty_start ), "must start with an input_conv" ) );

  auto spec = ecg_network( 6, split_config::from_tuple( { 6, 6, 6, 6, 1, 1, 6 } ) );

  auto no_bin = spec;
  no_bin.layers.erase( no_bin.layers.begin() + 2 ); // binarize before the first split block
  CHECK( mentions( validate_network( no_bin ), "not binary" ) );

  auto bad_sigma = spec;
  std::get<batch_norm_layer>( bad_sigma.layers[1] ).params.sigma_sq[3] = 0.0;
  CHECK( mentions( validate_network( bad_sigma ), "sigma_sq must be positive (channel 3)" ) );

  auto nan_weight = spec;
  std::get<input_conv_layer>( nan_weight.layers[0] ).weights[0] = std::nan( "" );
  CHECK( mentions( validate_network( nan_weight ), "weights must be finite" ) );

  auto trailing = spec;
  trailing.layers.push_back( binarize_layer{} );
  CHECK( mentions( validate_network( trailing ), "after the network output" ) );

  auto deployed_label = spec;
  deployed_label.phase = network_phase::deployment;
  CHECK( mentions( validate_network( deployed_label ), "must directly follow a binarize" ) );
}

TEST_CASE( "random generated networks are well formed", "[ir][property]" )
{
  gen::rng_t rng( 11 );
  for ( int i = 0; i < 200; ++i )
  {
    auto const spec = gen::random_training_network( rng );
    INFO( "network " << i );
    CHECK( validate_network( spec ).empty() );
  }
}
