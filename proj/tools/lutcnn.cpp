#include <iostream>

#include <lutcnn/cli.hpp>

int main( int argc, char** argv )
{
  return lutcnn::cli_main( argc, argv, std::cout, std::cerr );
}
