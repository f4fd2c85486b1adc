# Empty file to make data a package 