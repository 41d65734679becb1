package demo.units;

public class TemperatureConverter {

    /**
     * Converts a temperature in celsius degrees to fahrenheit degrees.
     */
    public static double celsiusToFahrenheit(double celsius) {
        return celsius * 9.0 / 5.0 + 32.0;
    }

    /**
     * Converts a temperature in fahrenheit degrees to celsius degrees.
     */
    public static double fahrenheitToCelsius(double fahrenheit) {
        return (fahrenheit - 32.0) * 5.0 / 9.0;
    }
}
