// Regenerates the committed CLI fixtures: an ECG network (c0 = 6) with
// seeded random parameters, a sample file and the reference decisions.
//
//   make_fixtures <out-dir>

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

#include <lutcnn/lutcnn.hpp>

int main( int argc, char** argv )
{
  if ( argc != 2 )
  {
    std::cerr << "usage: make_fixtures <out-dir>\n";
    return 1;
  }
  using namespace lutcnn;
  std::filesystem::path const dir( argv[1] );
  std::filesystem::create_directories( dir );

  constexpr std::uint64_t model_seed = 20211;
  constexpr std::uint64_t data_seed = 5250;
  constexpr int windows = 8;
  constexpr int window_length = 400;

  auto const hidden = split_config::from_tuple( { 6, 6, 6, 6, 1, 1, 6 } );
  random_parameter_options opts;
  opts.zero_gamma = 0.0;
  auto spec = randomize_parameters( ecg_network( 6, hidden ), model_seed, opts );

  // bounded random walk, roughly the dynamics of a filtered sensor trace
  std::mt19937_64 rng( data_seed );
  std::vector<std::vector<std::int64_t>> data( windows );
  std::int64_t x = 0;
  for ( auto& window : data )
    for ( int t = 0; t < window_length; ++t )
    {
      x += static_cast<std::int64_t>( rng() % 257 ) - 128;
      x = std::clamp<std::int64_t>( x, -2048, 2047 );
      window.push_back( x );
    }

  spec = calibrate_batchnorm( spec, data );

  // put the output threshold between two distinct window logits near the median
  std::vector<double> logits;
  for ( auto const& window : data )
    logits.push_back( reference_forward( spec, window ).logits.back() );
  std::sort( logits.begin(), logits.end() );
  logits.erase( std::unique( logits.begin(), logits.end() ), logits.end() );
  if ( logits.size() < 2 )
  {
    std::cerr << "all windows reach the same logit\n";
    return 1;
  }
  auto const mid = logits.size() / 2;
  double const shift = 0.5 * ( logits[mid - 1] + logits[mid] );
  for ( auto& l : spec.layers )
    if ( auto* lin = std::get_if<linear_layer>( &l ) )
      lin->bias[0] -= shift;
  save_model( spec, ( dir / "ecg_c6.json" ).string() );

  std::ostringstream samples, golden;
  for ( auto const& window : data )
  {
    for ( auto v : window )
      samples << v << "\n";
    golden << ( reference_forward( spec, window ).decision ? 1 : 0 ) << "\n";
  }
  write_text_file( ( dir / "ecg_samples.txt" ).string(), samples.str(), "cli" );
  write_text_file( ( dir / "ecg_golden.txt" ).string(), golden.str(), "cli" );
  std::cout << "wrote fixtures to " << dir.string() << "\n";
  return 0;
}
